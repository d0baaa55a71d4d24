use rayon::prelude::*;
use rug::Float;

use super::config::check_arc;
use crate::density::sigma;
use crate::error::{Error, Result};
use crate::precision::{checked_precision, required_bits_f64, two_pi};
use crate::spiral::ObliqueLine;

/// The disc `B(i·center, radius)`; its image `U = exp(B)` is avoided by
/// `exp∘exp` of every line whose spiral misses the arc translates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForbiddenBall {
    pub center_im: f64,
    pub radius: f64,
}

/// Slope bound for the spiral arcs in `{|Re z| < ½, |Im z| > ½}` when
/// `α < α1 < 1`.
pub fn slope_constant(alpha1: f64) -> Result<f64> {
    if !(alpha1 > 0.0 && alpha1 < 1.0) {
        return Err(Error::InvalidInput(format!(
            "slope constant needs 0 < alpha1 < 1, got {alpha1}"
        )));
    }
    Ok((1.0 + alpha1) / (1.0 - alpha1))
}

pub fn forbidden_ball(center: f64, length: f64, c_slope: f64) -> Result<ForbiddenBall> {
    if !(c_slope >= 1.0) || !(length >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "bad ball data: length {length}, slope constant {c_slope}"
        )));
    }
    check_arc(center, length)?;
    Ok(ForbiddenBall {
        center_im: center,
        radius: length / (4.0 * c_slope),
    })
}

impl ForbiddenBall {
    /// Distance from `z` to the translates `i·center + 2πiℤ`; `exp(z) ∈ U`
    /// exactly when this is below the radius. `z` must carry enough bits to
    /// resolve its imaginary part modulo `2π`.
    pub fn distance(&self, re: &Float, im: &Float) -> f64 {
        let prec = im.prec();
        let tp = two_pi(prec);
        let d = Float::with_val(prec, im - self.center_im);
        let q = Float::with_val(prec, &d / &tp).round();
        let r = Float::with_val(prec, &d - Float::with_val(prec, &q * &tp));
        re.to_f64().hypot(r.to_f64())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallSamples {
    pub samples: usize,
    pub hits: usize,
    /// Smallest distance over the radius.
    pub min_ratio: f64,
}

/// Evaluates `Σ(t)` at every `t` with enough precision for its imaginary
/// part and counts the samples with `ρ(t) = exp(Σ(t)) ∈ U`.
pub fn ball_avoidance(line: &ObliqueLine, ball: &ForbiddenBall, ts: &[f64]) -> Result<BallSamples> {
    let (x, a) = (line.p_re().approx(), line.alpha().approx());
    let ratios: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            let prec = checked_precision(required_bits_f64(x + a * t, 64) + 64)?;
            let (re, im) = sigma(line, &Float::with_val(prec, t), prec);
            Ok(ball.distance(&re, &im) / ball.radius)
        })
        .collect::<Result<_>>()?;
    Ok(BallSamples {
        samples: ts.len(),
        hits: ratios.iter().filter(|&&r| r < 1.0).count(),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn radius_formula() {
        let b = forbidden_ball(10.0, 0.2, 2.0).unwrap();
        assert_eq!(b.center_im, 10.0);
        assert!((b.radius - 0.025).abs() < 1e-15);
        let b2 = forbidden_ball(10.0, 0.2, 4.0).unwrap();
        assert!((b2.radius - b.radius / 2.0).abs() < 1e-15);
    }

    #[test]
    fn low_arc_is_rejected() {
        assert!(matches!(
            forbidden_ball(0.5, 0.2, 2.0),
            Err(Error::ArcTooLow)
        ));
        assert!(forbidden_ball(10.0, 0.2, 0.5).is_err());
    }

    #[test]
    fn distance_sees_translates() {
        let b = ForbiddenBall {
            center_im: 1.5 * PI,
            radius: 0.01,
        };
        let prec = 128;
        let re = Float::with_val(prec, 0.001);
        let im = Float::with_val(prec, 1.5 * PI + 7.0 * TAU);
        assert!(b.distance(&re, &im) < 0.002);
        let im = Float::with_val(prec, 0.5 * PI);
        assert!((b.distance(&re, &im) - PI).abs() < 1e-3);
    }

    #[test]
    fn slope_constant_range() {
        assert_eq!(slope_constant(0.5).unwrap(), 3.0);
        assert!(slope_constant(1.0).is_err());
    }

    #[test]
    fn line_through_the_ball_is_detected() {
        // p = i·3π/2 + small real part: Σ(0) = exp(p) = −i·e^{x}, so choose
        // the ball around that point's imaginary part.
        let line = ObliqueLine::from_f64(1.0, 1.5 * PI, 0.3).unwrap();
        let im0 = -(1f64.exp());
        let ball = ForbiddenBall {
            center_im: im0,
            radius: 0.05,
        };
        let s = ball_avoidance(&line, &ball, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(s.hits, 1);
        assert!(s.min_ratio < 1e-9);
    }
}
