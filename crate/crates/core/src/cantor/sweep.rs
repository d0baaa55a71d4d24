//! Left-to-right sweep over a parameter interval `W = [a, b]`.
//!
//! On `W` the level-`k` image is `ψ_k(a + δ) = σ·exp(Y0 + c δ)`, so its
//! residue moves by `q·|D|/2π` with `D = e^{Y0}(e^{cδ} − 1)` and
//! `q = σ·sign(c)`. The image meets the forbidden window exactly when
//! `|D|/2π ∈ g0 + m ± w` for an integer `m ≥ 0`, where `g0 = q(ρ_c − f0) mod 1`.
//! Each window pulls back to a `δ`-interval in closed form; merging the
//! sorted cut streams of all levels yields the components of the survivors.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use rug::Float;

use super::config::{psi_k, CantorConfig};
use crate::error::{Error, Result};
use crate::precision::BigReal;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Level {
    pub k: i64,
    pub c: f64,
    pub y0_log: f64,
    pub g0: f64,
}

pub(crate) fn level_at(
    config: &CantorConfig,
    k: i64,
    left: &Float,
    guard_bits: u32,
) -> Result<Level> {
    let pt = psi_k(config, k, &BigReal::from_float(left.clone()), guard_bits)?;
    let c = config.slope(k);
    let q = f64::from(pt.sign) * c.signum();
    let g0 = (q * (config.center_residue() - pt.frac.value_f64())).rem_euclid(1.0);
    let y0_log = pt.log_radius.to_f64();
    if y0_log > 700.0 {
        return Err(Error::InvalidInput(format!(
            "level {k} has log-radius {y0_log:.1}, beyond the double-precision sweep range"
        )));
    }
    Ok(Level {
        k,
        c,
        y0_log,
        g0: if g0 >= 1.0 { 0.0 } else { g0 },
    })
}

impl Level {
    /// `ln |ψ_k([a + s, a + e])|`.
    pub fn log_image_len(&self, s: f64, e: f64) -> f64 {
        let base = if self.c > 0.0 { s } else { e };
        self.y0_log + self.c * base + (self.c.abs() * (e - s)).exp_m1().ln()
    }
}

struct CutStream {
    c: f64,
    inv_scale: f64,
    g0: f64,
    half: f64,
    m: i64,
}

impl CutStream {
    fn new(level: &Level, half: f64) -> Self {
        CutStream {
            c: level.c,
            inv_scale: (-level.y0_log).exp(),
            g0: level.g0,
            half,
            m: -1,
        }
    }

    /// `δ` at which `|D|/2π` equals `turns`; infinite when never reached.
    fn delta(&self, turns: f64) -> f64 {
        let d = turns * TAU * self.inv_scale;
        if self.c > 0.0 {
            d.ln_1p() / self.c
        } else if d >= 1.0 {
            f64::INFINITY
        } else {
            (-d).ln_1p() / self.c
        }
    }

    fn next_cut(&mut self) -> Option<(f64, f64)> {
        let mut center = self.g0 + self.m as f64;
        self.m += 1;
        // The window below g0 only matters when it reaches past zero.
        if center + self.half <= 0.0 {
            center += 1.0;
            self.m += 1;
        }
        let lo = self.delta((center - self.half).max(0.0));
        if !lo.is_finite() {
            return None;
        }
        Some((lo, self.delta(center + self.half)))
    }
}

#[derive(PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Components `(s, e)` (offsets from the left end) of the part of
/// `[0, width]` that avoids every level's windows, in left-to-right order,
/// keeping those whose top-level image has log-length at least
/// `min_top_log`. Stops after `want` of them.
pub(crate) fn sweep(
    levels: &[Level],
    top: &Level,
    width: f64,
    half: f64,
    min_top_log: f64,
    want: usize,
) -> Vec<(f64, f64)> {
    // A window of zero width removes nothing.
    let active = if half > 0.0 { levels } else { &[] };
    let mut streams: Vec<CutStream> = active.iter().map(|l| CutStream::new(l, half)).collect();
    let mut heap = BinaryHeap::new();
    for (i, s) in streams.iter_mut().enumerate() {
        if let Some((lo, hi)) = s.next_cut() {
            heap.push(Reverse((Key(lo), i, Key(hi))));
        }
    }
    let mut out = Vec::new();
    let mut cover = 0.0f64;
    let consider = |s: f64, e: f64, out: &mut Vec<(f64, f64)>| {
        if e > s && top.log_image_len(s, e) >= min_top_log {
            out.push((s, e));
        }
    };
    loop {
        let Some(Reverse((Key(lo), i, Key(hi)))) = heap.pop() else {
            if cover < width {
                consider(cover, width, &mut out);
            }
            break;
        };
        if lo > cover {
            consider(cover, lo.min(width), &mut out);
        }
        if lo >= width || out.len() >= want {
            break;
        }
        cover = cover.max(hi);
        if cover >= width {
            break;
        }
        if let Some((lo, hi)) = streams[i].next_cut() {
            heap.push(Reverse((Key(lo), i, Key(hi))));
        }
    }
    out.truncate(want);
    out
}
