//! Finite-resolution density of `exp∘exp` of lines.
//!
//! A verdict here is always "covered at resolution (grid, K)", never
//! "dense": coverage is monotone in `K`, but no finite run decides density.

mod champernowne;
mod grid;
mod stats;
mod witness;

pub use champernowne::{
    champernowne_bits, shift_frac_oracle, shift_frac_oracle_with, BitSource, Champernowne,
    ChampernowneLine,
};
pub use grid::{paint_coverage, paint_crossing, paint_until_covered, AnnulusGrid};
pub use stats::{
    max_gap, max_gap_values, residue_values, star_discrepancy, star_discrepancy_values,
};
pub use witness::{rho, sigma, witness, witness_batch, Witness, SCAN_GUARD_BITS};
