use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("required precision {required} bits exceeds the ceiling of {ceiling} bits")]
    PrecisionOverflow { required: u64, ceiling: u32 },

    #[error("residue error bound {bound:e} is not below 2^-8; rerun at higher precision")]
    ResidueUncertain { bound: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spiral component through crossing {k} does not leave the strip within a half-turn")]
    DegenerateStrip { k: i64 },

    #[error("target 0 is never attained by the exponential")]
    InvalidTarget,

    #[error("no witness found within {k_max} crossings")]
    NotFound { k_max: u64 },

    #[error("parameter interval ({alpha0}, {alpha1}) is empty or contains 0")]
    InfeasibleInterval { alpha0: f64, alpha1: f64 },

    #[error("no component survives refinement at depth {depth}")]
    Extinction { depth: usize },

    #[error("forbidden arc translates meet the unit disc")]
    ArcTooLow,

    #[error("only {found} dyadic scales separate the largest and smallest lengths (need 3)")]
    InsufficientScales { found: usize },

    #[error("alpha must be positive, got {0}")]
    InvalidAlpha(f64),

    #[error("base point lies on the projection line S_{k}")]
    DegenerateProjection { k: i64 },

    #[error("parse error: {0}")]
    Parse(String),
}
