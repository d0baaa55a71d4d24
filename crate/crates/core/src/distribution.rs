//! Occupation measure of `ρ(t) = exp(exp(p + t(i + α)))` over `[−T, T]`.
//!
//! Points of the sphere are replaced by threshold buckets: `ρ` is near `∞`
//! when `Re Σ > M`, near `0` when `Re Σ < −M`, and near `1` when `Σ` lies
//! within `eta` of `2πiℤ`. `log|ρ| = Re Σ` is never exponentiated.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use rug::Float;

use crate::density::sigma;
use crate::error::{Error, Result};
use crate::precision::{checked_precision, precision_ceiling, required_bits_f64, two_pi};
use crate::spiral::ObliqueLine;

/// Above this log-modulus of `Σ` the imaginary part is reduced mod `2π`
/// in multiple precision.
const F64_LOG_MODULUS_LIMIT: f64 = 8.0;

const CHUNK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bucket {
    Zero,
    One,
    Infinity,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionEstimate {
    pub t: f64,
    pub m_threshold: f64,
    pub eta: f64,
    pub sample_count: usize,
    pub mass_0: f64,
    pub mass_1: f64,
    pub mass_inf: f64,
    pub mass_other: f64,
    /// Adjacent grid points in different buckets; `transitions / sample_count`
    /// bounds the grid's deviation from the exact occupation measure when
    /// each bucket boundary is crossed at most once per grid cell.
    pub transitions: usize,
}

impl DistributionEstimate {
    pub fn masses(&self) -> [f64; 4] {
        [self.mass_0, self.mass_1, self.mass_inf, self.mass_other]
    }

    pub fn sampling_error(&self) -> f64 {
        self.transitions as f64 / self.sample_count as f64
    }

    /// Euclidean distance of `(mass_0, mass_1, mass_inf, mass_other)` to
    /// `(1/4, 1/2, 1/4, 0)`.
    pub fn distance_to_limit(&self) -> f64 {
        let limit = [0.25, 0.5, 0.25, 0.0];
        self.masses()
            .iter()
            .zip(limit)
            .map(|(m, l)| (m - l).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Intervals of `t` on which `cos(Im p + t)` keeps one sign, shifted as in
/// the limit argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalStructure {
    pub n: u64,
    pub plus: (f64, f64),
    pub minus: (f64, f64),
}

/// `I_n^+ = 2nπ + [−π/2 + 1/n − Im p, π/2 + 1/n − Im p]` and `I_n^- = I_n^+ + π`.
pub fn interval_structure(line: &ObliqueLine, n: u64) -> Result<IntervalStructure> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "interval index must be at least 1".into(),
        ));
    }
    let shift = 2.0 * n as f64 * PI + 1.0 / n as f64 - line.p_im().approx();
    let plus = (shift - FRAC_PI_2, shift + FRAC_PI_2);
    Ok(IntervalStructure {
        n,
        plus,
        minus: (plus.0 + PI, plus.1 + PI),
    })
}

/// Bucket rule with the line's constants cached in double precision.
struct Classifier<'a> {
    line: &'a ObliqueLine,
    x: f64,
    y: f64,
    a: f64,
    log_m: f64,
    eta: f64,
}

impl<'a> Classifier<'a> {
    fn new(line: &'a ObliqueLine, m_threshold: f64, eta: f64) -> Result<Self> {
        if !(m_threshold > 1.0) || !(eta > 0.0 && eta < 0.5) {
            return Err(Error::InvalidInput(format!(
                "need M > 1 and 0 < eta < 1/2, got M = {m_threshold}, eta = {eta}"
            )));
        }
        Ok(Classifier {
            line,
            x: line.p_re().approx(),
            y: line.p_im().approx(),
            a: line.alpha().approx(),
            log_m: m_threshold.ln(),
            eta,
        })
    }

    fn classify(&self, t: f64) -> Bucket {
        let log_mod = self.x + self.a * t;
        let (s, c) = (self.y + t).sin_cos();
        let log_re = log_mod + c.abs().ln();
        if log_re > self.log_m {
            return if c > 0.0 {
                Bucket::Infinity
            } else {
                Bucket::Zero
            };
        }
        if log_mod < self.eta.ln() {
            return Bucket::One;
        }
        let re = log_re.exp().copysign(c);
        if re.abs() >= self.eta {
            return Bucket::Other;
        }
        let (re, im) = if log_mod <= F64_LOG_MODULUS_LIMIT {
            let v = log_mod.exp() * s;
            (re, v - TAU * (v / TAU).round())
        } else {
            self.reduced(t, log_mod)
        };
        if re.hypot(im) < self.eta {
            Bucket::One
        } else {
            Bucket::Other
        }
    }

    /// `Σ(t)` with the imaginary part reduced to `[−π, π]`, at enough bits
    /// for the reduction.
    fn reduced(&self, t: f64, log_mod: f64) -> (f64, f64) {
        let prec = checked_precision(required_bits_f64(log_mod, 64) + 64)
            .unwrap_or_else(|_| precision_ceiling());
        let (re, im) = sigma(self.line, &Float::with_val(prec, t), prec);
        let tp = two_pi(prec);
        let q = Float::with_val(prec, &im / &tp).round();
        (
            re.to_f64(),
            Float::with_val(prec, &im - Float::with_val(prec, &q * &tp)).to_f64(),
        )
    }
}

pub fn classify(line: &ObliqueLine, t: f64, m_threshold: f64, eta: f64) -> Result<Bucket> {
    Ok(Classifier::new(line, m_threshold, eta)?.classify(t))
}

/// `(2j + 1 − n)T/n` for `j < n`: cell midpoints of a uniform grid, symmetric about 0.
fn grid_point(j: usize, n: usize, t: f64) -> f64 {
    (2.0 * j as f64 + 1.0 - n as f64) * t / n as f64
}

#[derive(Default, Clone, Copy)]
struct Counts {
    by_bucket: [usize; 4],
    transitions: usize,
    first: Option<Bucket>,
    last: Option<Bucket>,
}

impl Counts {
    fn merge(self, other: Counts) -> Counts {
        let mut out = Counts {
            transitions: self.transitions + other.transitions,
            ..self
        };
        for i in 0..4 {
            out.by_bucket[i] += other.by_bucket[i];
        }
        if let (Some(a), Some(b)) = (self.last, other.first) {
            out.transitions += usize::from(a != b);
        }
        out.first = self.first.or(other.first);
        out.last = other.last.or(self.last);
        out
    }
}

fn index(b: Bucket) -> usize {
    match b {
        Bucket::Zero => 0,
        Bucket::One => 1,
        Bucket::Infinity => 2,
        Bucket::Other => 3,
    }
}

/// Bucket frequencies on the uniform symmetric grid of `samples` points in `[−T, T]`.
pub fn estimate_mu_t(
    line: &ObliqueLine,
    t: f64,
    samples: usize,
    m_threshold: f64,
    eta: f64,
) -> Result<DistributionEstimate> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("T = {t} must exceed 1")));
    }
    if samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let cl = Classifier::new(line, m_threshold, eta)?;
    let chunks: Vec<Counts> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut counts = Counts::default();
            for j in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let b = cl.classify(grid_point(j, samples, t));
                counts.by_bucket[index(b)] += 1;
                if let Some(prev) = counts.last {
                    counts.transitions += usize::from(prev != b);
                }
                counts.first.get_or_insert(b);
                counts.last = Some(b);
            }
            counts
        })
        .collect();
    let total = chunks.into_iter().reduce(Counts::merge).unwrap_or_default();
    let n = samples as f64;
    Ok(DistributionEstimate {
        t,
        m_threshold,
        eta,
        sample_count: samples,
        mass_0: total.by_bucket[0] as f64 / n,
        mass_1: total.by_bucket[1] as f64 / n,
        mass_inf: total.by_bucket[2] as f64 / n,
        mass_other: total.by_bucket[3] as f64 / n,
        transitions: total.transitions,
    })
}

/// Fractions of `samples` evenly spaced points of `I_n^+` classified near
/// `∞`, and of `I_n^-` classified near `0`.
pub fn interval_occupancy(
    line: &ObliqueLine,
    n: u64,
    samples: usize,
    m_threshold: f64,
    eta: f64,
) -> Result<(f64, f64)> {
    let cl = Classifier::new(line, m_threshold, eta)?;
    let iv = interval_structure(line, n)?;
    let frac = |(lo, hi): (f64, f64), want: Bucket| {
        let hits = (0..samples)
            .filter(|&j| cl.classify(lo + (j as f64 + 0.5) * (hi - lo) / samples as f64) == want)
            .count();
        hits as f64 / samples as f64
    };
    Ok((
        frac(iv.plus, Bucket::Infinity),
        frac(iv.minus, Bucket::Zero),
    ))
}
