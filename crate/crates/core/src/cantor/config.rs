use std::f64::consts::{PI, TAU};

use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{checked_precision, pi, reduce_exp, required_bits_f64, BigReal, Frac, Real};

/// Residue margin added on each side of every forbidden window while
/// sweeping. It absorbs the f64 rounding of local sweep coordinates.
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// Binary digits kept for interval endpoints.
pub const DEFAULT_DYADIC_BITS: u32 = 1024;

/// Parameters of the non-dense parameter construction for a base point `p`
/// and a parameter interval `(α0, α1)`.
///
/// Points of `J = p + i + (α0, α1)` are identified with their parameter `α`;
/// `k0` is the last level whose projection lies left of the imaginary axis
/// for the whole interval, `n` is the block length, and `[i_center ± i_length/2]`
/// is the forbidden arc on the imaginary axis (repeated with period `2π`).
#[derive(Clone, Debug)]
pub struct CantorConfig {
    pub p_re: Real,
    pub p_im: Real,
    pub alpha0: f64,
    pub alpha1: f64,
    pub n: u32,
    pub k0: i64,
    pub c_lower: f64,
    pub m_upper: f64,
    pub i_length: f64,
    pub i_center: f64,
    pub component_cap: usize,
    pub dyadic_bits: u32,
    pub margin: f64,
    /// True when the input interval was negative and the construction runs
    /// on the conjugate line (`p → conj p`, `α → −α`).
    pub conjugated: bool,
}

/// The image of `α` under the projection onto `S_k = (k + ½)πi + R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub re: f64,
    pub im: f64,
}

/// A point `sign · i · exp(log_radius)` on the imaginary axis and its residue.
#[derive(Clone, Debug)]
pub struct AxisPoint {
    pub sign: i8,
    pub log_radius: BigReal,
    pub frac: Frac,
}

impl CantorConfig {
    pub fn interval_length(&self) -> f64 {
        self.alpha1 - self.alpha0
    }

    /// `(k + ½)π − Im p` in double precision.
    pub fn slope(&self, k: i64) -> f64 {
        PI * (k as f64 + 0.5) - self.p_im.approx()
    }

    /// `(k + ½)π − Im p` at `prec` bits.
    pub fn slope_big(&self, k: i64, prec: u32) -> Float {
        let half_turns = Float::with_val(prec, pi(prec) * Float::with_val(64, 2 * k + 1)) >> 1u32;
        Float::with_val(prec, &half_turns - self.p_im.eval(prec).as_float())
    }

    /// True when `p` lies on `S_k`, so that the projection collapses.
    pub fn is_degenerate(&self, k: i64) -> bool {
        let c = self.slope_big(k, 256);
        c.is_zero() || c.get_exp().is_some_and(|e| e < -200)
    }

    /// Levels `k` in `(from, to]` used by the construction.
    pub fn levels(&self, from: i64, to: i64) -> Vec<i64> {
        ((from + 1)..=to)
            .filter(|&k| !self.is_degenerate(k))
            .collect()
    }

    /// `ln |Dψ_k(α)| = ln|c_k| + Re p + c_k α`.
    pub fn log_dpsi(&self, k: i64, alpha: f64) -> f64 {
        let c = self.slope(k);
        c.abs().ln() + self.p_re.approx() + c * alpha
    }

    pub fn dpsi(&self, k: i64, alpha: f64) -> f64 {
        self.log_dpsi(k, alpha).exp()
    }

    /// Residue of the forbidden arc's centre.
    pub fn center_residue(&self) -> f64 {
        (self.i_center / TAU).rem_euclid(1.0)
    }

    /// Half-width of the forbidden residue window (without margin).
    pub fn window_half_width(&self) -> f64 {
        self.i_length / (4.0 * PI)
    }

    pub fn phi_k(&self, k: i64, alpha: f64) -> Result<Projection> {
        phi_k(self, k, alpha)
    }

    pub fn psi_k(&self, k: i64, alpha: &BigReal, guard_bits: u32) -> Result<AxisPoint> {
        psi_k(self, k, alpha, guard_bits)
    }
}

/// `φ_k(p + i + α) = Re p + c_k α + i(k + ½)π` with `c_k = (k + ½)π − Im p`.
pub fn phi_k(config: &CantorConfig, k: i64, alpha: f64) -> Result<Projection> {
    if config.is_degenerate(k) {
        return Err(Error::DegenerateProjection { k });
    }
    let c = config.slope(k);
    Ok(Projection {
        re: config.p_re.approx() + c * alpha,
        im: PI * (k as f64 + 0.5),
    })
}

/// `ψ_k = exp ∘ φ_k`, on the imaginary axis with sign `(−1)^k`.
pub fn psi_k(config: &CantorConfig, k: i64, alpha: &BigReal, guard_bits: u32) -> Result<AxisPoint> {
    if config.is_degenerate(k) {
        return Err(Error::DegenerateProjection { k });
    }
    let approx = config.p_re.approx() + config.slope(k) * alpha.to_f64();
    let mag =
        config.p_re.approx().abs() + config.slope(k).abs() * (alpha.to_f64().abs() + 1.0) + 1.0;
    let extra = (16.0 * mag).log2().ceil().max(0.0) as u64 + 2;
    let prec = checked_precision(required_bits_f64(approx, guard_bits) + extra)?
        .max(alpha.precision_bits());
    let c = config.slope_big(k, prec);
    let x = config.p_re.eval(prec).into_float();
    let u = Float::with_val(prec, &x + Float::with_val(prec, &c * alpha.as_float()));
    let err = Float::with_val(64, 8.0 * mag) >> prec;
    let frac = reduce_exp(&u, Some(&err), prec, guard_bits)?;
    let sign: i8 = if k.rem_euclid(2) == 0 { 1 } else { -1 };
    let frac = if sign < 0 { frac.negated() } else { frac };
    Ok(AxisPoint {
        sign,
        log_radius: BigReal::from_float(u),
        frac,
    })
}

/// Checks every size condition on `n` for the given data.
fn n_conditions(n: u32, k0: i64, p_re: f64, p_im: f64, alpha0: f64, width: f64) -> bool {
    let nf = f64::from(n);
    nf > 2.0 * k0.unsigned_abs() as f64 + 8.0 * PI
        && nf * PI > 2.0 * p_im.abs()
        && nf * PI * alpha0 / 2.0 > 4.0 * nf.ln()
        && nf.ln() + p_re > 0.0
        && 1.0 / (nf * nf) < width
}

/// Chooses `k0`, the smallest admissible `N`, the constants `C` and `M`, and
/// the forbidden arc.
pub fn choose_config(
    p_re: Real,
    p_im: Real,
    alpha0: f64,
    alpha1: f64,
    component_cap: usize,
) -> Result<CantorConfig> {
    choose_config_with(p_re, p_im, alpha0, alpha1, component_cap, None)
}

/// As [`choose_config`], optionally forcing a larger block length.
pub fn choose_config_with(
    p_re: Real,
    p_im: Real,
    alpha0: f64,
    alpha1: f64,
    component_cap: usize,
    min_n: Option<u32>,
) -> Result<CantorConfig> {
    if !(alpha1 > alpha0)
        || !alpha0.is_finite()
        || !alpha1.is_finite()
        || (alpha0 < 0.0 && alpha1 > 0.0)
    {
        return Err(Error::InfeasibleInterval { alpha0, alpha1 });
    }
    if alpha0 == 0.0 || alpha1 == 0.0 {
        return Err(Error::InfeasibleInterval { alpha0, alpha1 });
    }
    if component_cap == 0 {
        return Err(Error::InvalidInput("component cap must be positive".into()));
    }
    let (p_im, alpha0, alpha1, conjugated) = if alpha1 < 0.0 {
        (p_im.neg(), -alpha1, -alpha0, true)
    } else {
        (p_im, alpha0, alpha1, false)
    };
    let x = p_re.approx();
    let y = p_im.approx();

    let re_phi = |k: i64, a: f64| x + (PI * (k as f64 + 0.5) - y) * a;
    // Re φ_k grows with k for α > 0, so the admissible levels form a down-set.
    let mut k0 = ((-x / alpha1 + y) / PI - 0.5).floor() as i64 + 2;
    while !(re_phi(k0, alpha0) < 0.0 && re_phi(k0, alpha1) < 0.0) {
        k0 -= 1;
    }
    while re_phi(k0 + 1, alpha0) < 0.0 && re_phi(k0 + 1, alpha1) < 0.0 {
        k0 += 1;
    }

    let width = alpha1 - alpha0;
    let mut n = min_n.unwrap_or(1).max(1);
    while !n_conditions(n, k0, x, y, alpha0, width) {
        n += 1;
        if n > 1_000_000 {
            return Err(Error::InfeasibleInterval { alpha0, alpha1 });
        }
    }

    let mut config = CantorConfig {
        p_re,
        p_im,
        alpha0,
        alpha1,
        n,
        k0,
        c_lower: 0.0,
        m_upper: 0.0,
        i_length: 0.0,
        i_center: 1.5 * PI,
        component_cap,
        dyadic_bits: DEFAULT_DYADIC_BITS,
        margin: DEFAULT_MARGIN,
        conjugated,
    };

    // |Dψ_k| is monotone in α, so the minimum over J sits at an endpoint.
    let nk = i64::from(n);
    let min_log = config
        .levels(k0, nk)
        .into_iter()
        .flat_map(|k| [config.log_dpsi(k, alpha0), config.log_dpsi(k, alpha1)])
        .fold(f64::INFINITY, f64::min);
    config.c_lower = min_log.exp().min(1.0) * (1.0 - 2f64.powi(-20));
    config.m_upper = config.dpsi(nk, alpha0).max(config.dpsi(nk, alpha1));
    config.i_length = f64::from(n).powi(-4) * config.c_lower / config.m_upper;

    // Keep exp(p) out of the arc's translates by nudging the centre.
    let r = (y - PI / 2.0).rem_euclid(PI);
    if r < 1e-12 || PI - r < 1e-12 {
        let im = x.exp() * y.sin();
        let mut center = config.i_center;
        while ((im - center + PI).rem_euclid(TAU) - PI).abs() <= config.i_length {
            center += 0.25;
        }
        config.i_center = center;
    }
    check_arc(config.i_center, config.i_length)?;
    Ok(config)
}

/// The arc's translates must stay outside the closed unit disc.
pub fn check_arc(center: f64, length: f64) -> Result<()> {
    let c = center.rem_euclid(TAU);
    if c > 1.0 + length / 2.0 && c < TAU - 1.0 - length / 2.0 {
        Ok(())
    } else {
        Err(Error::ArcTooLow)
    }
}
