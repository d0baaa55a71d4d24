//! Constructive density: find `t` with `|exp(exp(p + t(i+α))) − w| ≤ eps`.
//!
//! Writing `w = exp(v)`, a solution needs `Σ(t) ≡ v (mod 2πi)`. Near
//! crossing `k` the spiral runs along a line of slope `−α` through
//! `w_k ≡ 2πi·frac_k`, so the crossing is useful when
//! `frac_k ≈ (Im v + α Re v)/2π (mod 1)`. Matching crossings are refined on
//! the exact local chart and every answer is re-evaluated at twice the
//! working precision before it is returned.

use std::f64::consts::{PI, TAU};

use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{checked_precision, required_bits_f64, BigReal, Frac};
use crate::spiral::{FracStream, LocalChart, ObliqueLine};

/// Residue precision used while scanning crossings.
pub const SCAN_GUARD_BITS: u32 = 40;

#[derive(Clone, Debug)]
pub struct Witness {
    pub t: BigReal,
    /// Crossing whose strip component contains the solution (`None` when it
    /// was found near `t = 0`).
    pub crossing: Option<i64>,
    /// `|ρ(t) − target|` evaluated at `verify_bits`.
    pub residual: f64,
    pub verify_bits: u32,
}

/// `Σ(t) = exp(p + t(i + α))` at `prec` bits.
pub fn sigma(line: &ObliqueLine, t: &Float, prec: u32) -> (Float, Float) {
    let x = line.p_re().eval(prec).into_float();
    let y = line.p_im().eval(prec).into_float();
    let a = line.alpha().eval(prec).into_float();
    let log_mag = Float::with_val(prec, &x + Float::with_val(prec, &a * t));
    let mag = Float::with_val(prec, log_mag.exp_ref());
    let ang = Float::with_val(prec, &y + t);
    let (s, c) = Float::with_val(prec, &ang).sin_cos(Float::new(prec));
    (
        Float::with_val(prec, &mag * &c),
        Float::with_val(prec, &mag * &s),
    )
}

/// `ρ(t) = exp(Σ(t))` at `prec` bits, rounded to f64. The huge imaginary
/// part of `Σ` is reduced by MPFR's own sine and cosine.
pub fn rho(line: &ObliqueLine, t: &Float, prec: u32) -> (f64, f64) {
    let (sr, si) = sigma(line, t, prec);
    let m = sr.to_f64().exp();
    let (s, c) = si.sin_cos(Float::new(prec));
    (m * c.to_f64(), m * s.to_f64())
}

fn rho_f64(x: f64, y: f64, a: f64, t: f64) -> (f64, f64) {
    let mag = (x + a * t).exp();
    let (sr, si) = (mag * (y + t).cos(), mag * (y + t).sin());
    let m = sr.exp();
    (m * si.cos(), m * si.sin())
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

struct Pending {
    index: usize,
    target: (f64, f64),
    modulus: f64,
    log_mod: f64,
    arg: f64,
    residue: f64,
    tol: f64,
}

fn verify(line: &ObliqueLine, t: &BigReal, target: (f64, f64), eps: f64) -> Option<(f64, u32)> {
    let bits = t.precision_bits().saturating_mul(2);
    let value = rho(line, t.as_float(), bits);
    let residual = distance(value, target);
    (residual <= eps).then_some((residual, bits))
}

/// Searches `t ∈ [−π, π]` directly; small `|Σ|` makes this the only place
/// where targets near `exp(exp(p))` are reachable.
fn probe_near_origin(line: &ObliqueLine, target: (f64, f64), eps: f64) -> Option<Witness> {
    let (x, y, a) = (
        line.p_re().approx(),
        line.p_im().approx(),
        line.alpha().approx(),
    );
    if x + a.abs() * PI > 20.0 {
        return None;
    }
    let n = 4096;
    let f = |t: f64| distance(rho_f64(x, y, a, t), target);
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let t = -PI + TAU * i as f64 / n as f64;
            (t, f(t))
        })
        .collect();
    let mut minima: Vec<(f64, f64)> = (1..n)
        .filter(|&i| grid[i].1 <= grid[i - 1].1 && grid[i].1 <= grid[i + 1].1)
        .map(|i| grid[i])
        .collect();
    minima.sort_by(|p, q| p.1.total_cmp(&q.1));
    let h = TAU / n as f64;
    for &(t0, _) in minima.iter().take(4) {
        let (mut lo, mut hi) = (t0 - h, t0 + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        if f(t) <= 0.5 * eps {
            let tb = BigReal::from_f64(t, 128);
            if let Some((residual, verify_bits)) = verify(line, &tb, target, eps) {
                return Some(Witness {
                    t: tb,
                    crossing: None,
                    residual,
                    verify_bits,
                });
            }
        }
    }
    None
}

/// Solves on the local chart of crossing `k` and checks the result.
fn refine(
    line: &ObliqueLine,
    k: i64,
    frac: &Frac,
    p: &Pending,
    eps: f64,
) -> Result<Option<Witness>> {
    let chart = LocalChart::new(line, k);
    let dir = if p.log_mod == 0.0 {
        1.0
    } else {
        -chart.sign * p.log_mod.signum()
    };
    let Some(u) = chart.solve_re(p.log_mod, dir) else {
        return Ok(None);
    };
    let angle = TAU * frac.value_f64() + chart.d_im(u);
    let delta = (angle - p.arg + PI).rem_euclid(TAU) - PI;
    let predicted = p.modulus * 2.0 * (delta / 2.0).sin().abs();
    if predicted > 0.9 * eps {
        return Ok(None);
    }
    // t must resolve Σ(t) to far below one radian although |Σ| ≈ r_k.
    let bits = required_bits_f64(chart.log_radius, 64) + 64;
    let prec = checked_precision(bits)?;
    let (t_k, log_r) = line.crossing_time(k, prec);
    let inv_r = Float::with_val(prec, (-log_r).exp_ref());
    let s = Float::with_val(prec, Float::with_val(prec, u) * &inv_r);
    let t = BigReal::from_float(Float::with_val(prec, &t_k + &s));
    Ok(
        verify(line, &t, p.target, eps).map(|(residual, verify_bits)| Witness {
            t,
            crossing: Some(k),
            residual,
            verify_bits,
        }),
    )
}

/// Finds witnesses for several targets in a single pass over the crossings.
pub fn witness_batch(
    line: &ObliqueLine,
    targets: &[(f64, f64)],
    eps: f64,
    k_max: u64,
) -> Result<Vec<Result<Witness>>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps {eps} must be positive")));
    }
    let alpha = line.alpha().approx();
    let mut out: Vec<Option<Result<Witness>>> = vec![None; targets.len()];
    let mut pending = Vec::new();
    for (index, &target) in targets.iter().enumerate() {
        let modulus = target.0.hypot(target.1);
        if modulus == 0.0 || !modulus.is_finite() {
            out[index] = Some(Err(Error::InvalidTarget));
            continue;
        }
        if let Some(w) = probe_near_origin(line, target, eps) {
            out[index] = Some(Ok(w));
            continue;
        }
        let log_mod = modulus.ln();
        let arg = target.1.atan2(target.0);
        pending.push(Pending {
            index,
            target,
            modulus,
            log_mod,
            arg,
            residue: ((arg + alpha * log_mod) / TAU).rem_euclid(1.0),
            tol: 0.9 * eps / (TAU * modulus),
        });
    }

    if !pending.is_empty() && k_max > 0 {
        for item in FracStream::new(line, SCAN_GUARD_BITS)?.take(k_max as usize) {
            let (k, frac) = item?;
            let f = frac.value_f64();
            let mut i = 0;
            while i < pending.len() {
                let p = &pending[i];
                let d = (f - p.residue).rem_euclid(1.0);
                if d.min(1.0 - d) < p.tol {
                    if let Some(w) = refine(line, k, &frac, p, eps)? {
                        out[p.index] = Some(Ok(w));
                        pending.swap_remove(i);
                        continue;
                    }
                }
                i += 1;
            }
            if pending.is_empty() {
                break;
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|o| o.unwrap_or(Err(Error::NotFound { k_max })))
        .collect())
}

/// Finds `t` with `|ρ(t) − target| ≤ eps` using at most `k_max` crossings.
pub fn witness(line: &ObliqueLine, target: (f64, f64), eps: f64, k_max: u64) -> Result<Witness> {
    witness_batch(line, &[target], eps, k_max)?
        .pop()
        .expect("one result per target")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_not_a_target() {
        let line = ObliqueLine::from_f64(0.0, 0.0, 0.3).unwrap();
        assert!(matches!(
            witness(&line, (0.0, 0.0), 1e-3, 10),
            Err(Error::InvalidTarget)
        ));
    }

    #[test]
    fn rho_at_zero_is_found_at_zero() {
        let line = ObliqueLine::from_f64(0.2, 0.4, 0.3).unwrap();
        let target = rho(&line, &Float::new(64), 128);
        let w = witness(&line, target, 1e-6, 0).unwrap();
        assert!(w.t.to_f64().abs() < 1e-5);
        assert!(w.residual <= 1e-6);
    }

    #[test]
    fn far_crossings_give_verified_witnesses() {
        let line = ObliqueLine::from_f64(0.0, 0.0, 0.2).unwrap();
        let targets = [(-1.0, 0.0), (0.5, 1.5), (2.0, -0.3)];
        for w in witness_batch(&line, &targets, 1e-3, 200_000).unwrap() {
            let w = w.unwrap();
            assert!(w.residual <= 1e-3);
        }
    }

    #[test]
    fn exhausted_search_reports_not_found() {
        let line = ObliqueLine::from_f64(0.0, 0.0, 0.2).unwrap();
        assert!(matches!(
            witness(&line, (-1.0, 0.0), 1e-9, 5),
            Err(Error::NotFound { k_max: 5 })
        ));
    }
}
