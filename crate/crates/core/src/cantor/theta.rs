use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{checked_precision, two_pi, BigReal};

/// `θ = e^{2πα}`, at the precision of `alpha` (at least 64 bits).
pub fn export_theta(alpha: &BigReal) -> Result<BigReal> {
    if !(alpha.as_float().is_sign_positive() && !alpha.is_zero()) {
        return Err(Error::InvalidAlpha(alpha.to_f64()));
    }
    let prec = alpha.precision_bits().max(64);
    let wide = prec + 16;
    let x = Float::with_val(wide, two_pi(wide) * alpha.as_float());
    Ok(BigReal::from_float(Float::with_val(prec, x.exp_ref())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaCheck {
    pub checked: u64,
    /// Smallest `distance − half-width − error` over all powers.
    pub min_clearance: f64,
    pub violations: Vec<u64>,
}

/// Checks that `{θ^k}` keeps out of `center ± half_width` (mod 1) for
/// `1 ≤ k ≤ k_max`, by repeated multiplication at a precision that leaves
/// `guard_bits` correct bits after the integer part.
pub fn theta_avoidance(
    alpha: &BigReal,
    k_max: u64,
    center: f64,
    half_width: f64,
    guard_bits: u32,
) -> Result<ThetaCheck> {
    let a = alpha.to_f64();
    if !(a > 0.0) {
        return Err(Error::InvalidAlpha(a));
    }
    let log2_theta = std::f64::consts::TAU * a / std::f64::consts::LN_2;
    let kf = k_max.max(1) as f64;
    let need = kf * log2_theta + kf.log2() + 8.0 + f64::from(guard_bits) + (1.0 + 7.0 * a).log2();
    let prec = checked_precision(need.ceil() as u64)?.max(alpha.precision_bits());
    let theta = export_theta(&BigReal::from_float(Float::with_val(
        prec,
        alpha.as_float(),
    )))?
    .into_float();
    let mut power = Float::with_val(prec, 1);
    let mut out = ThetaCheck {
        checked: 0,
        min_clearance: f64::INFINITY,
        violations: Vec::new(),
    };
    for k in 1..=k_max {
        power *= &theta;
        // Each product and the rounding of θ add a relative error of a few ulps.
        let err =
            (16.0 * k as f64 * (1.0 + 7.0 * a)).log2() + k as f64 * log2_theta - f64::from(prec);
        let frac = Float::with_val(prec, power.fract_ref()).to_f64();
        let d = (frac - center).rem_euclid(1.0);
        let clearance = d.min(1.0 - d) - half_width - err.exp2();
        out.min_clearance = out.min_clearance.min(clearance);
        if clearance <= 0.0 {
            out.violations.push(k);
        }
        out.checked += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Real;

    #[test]
    fn log_two_gives_two() {
        let a = Real::log2_over_two_pi().eval(256);
        let t = export_theta(&a).unwrap();
        assert!((t.to_f64() - 2.0).abs() < 1e-60_f64.max(f64::EPSILON));
        let diff = Float::with_val(256, t.as_float() - 2);
        assert!(diff.abs() < Float::with_val(64, 1) >> 240u32);
    }

    #[test]
    fn non_positive_alpha_is_rejected() {
        assert!(matches!(
            export_theta(&BigReal::zero(64)),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            export_theta(&BigReal::from_f64(-0.1, 64)),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn theta_two_powers_have_zero_fraction() {
        let a = Real::log2_over_two_pi().eval(2048);
        let c = theta_avoidance(&a, 100, 0.5, 0.01, 32).unwrap();
        assert!(c.violations.is_empty());
        assert!(c.min_clearance > 0.48);
        let hit = theta_avoidance(&a, 10, 0.0, 0.01, 32).unwrap();
        assert_eq!(hit.violations.len(), 10);
    }

    #[test]
    fn matches_f64_for_small_powers() {
        let a = BigReal::from_f64(0.1, 64);
        let theta = (std::f64::consts::TAU * 0.1).exp();
        let c = theta_avoidance(&a, 5, 0.0, 0.0, 32).unwrap();
        let expected = (1..=5)
            .map(|k| {
                let f = theta.powi(k).fract();
                f.min(1.0 - f)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((c.min_clearance - expected).abs() < 1e-9);
    }
}
