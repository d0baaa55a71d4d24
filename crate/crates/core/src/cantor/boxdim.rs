use rug::{float::Round, Float, Integer};

use crate::error::{Error, Result};
use crate::precision::{scaled_integer, BigReal};

/// Scales finer than the hull by more than this many octaves are not used
/// unless the intervals themselves are that short.
const MAX_OCTAVES_BELOW_HULL: i32 = 14;

/// The coarsest box size used, in octaves below the hull; coarser boxes are
/// dominated by edge effects.
const FIRST_OCTAVE: i32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct BoxDimension {
    pub estimate: f64,
    /// `(j, count)` for each box size `2^{−j}` used in the fit.
    pub counts: Vec<(i32, Integer)>,
    /// Set when the intervals are a pruned subset of the full construction.
    pub pruned_subset: bool,
}

fn log2_of(x: &Float) -> f64 {
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + f64::from(e)
}

/// Number of closed dyadic boxes `[m, m+1]·2^{−j}` met by the union.
fn box_count(sorted: &[(BigReal, BigReal)], j: i32) -> Integer {
    let j = j as u32;
    let mut count = Integer::new();
    let mut last: Option<Integer> = None;
    for (lo, hi) in sorted {
        let mut a = scaled_integer(lo.as_float(), j, Round::Down);
        let b = scaled_integer(hi.as_float(), j, Round::Down);
        if let Some(l) = &last {
            if *l >= a {
                a = Integer::from(l + 1);
            }
        }
        if b >= a {
            count += Integer::from(&b - &a) + 1;
        }
        last = Some(match last {
            Some(l) if l > b => l,
            _ => b,
        });
    }
    count
}

/// Least-squares slope of `log2 N(2^{−j})` against `j`.
///
/// Box sizes run from a few octaves below the hull of the family down to the
/// shortest interval, or fourteen octaves below the hull when the intervals
/// are longer than that (or points).
pub fn box_dimension(
    intervals: &[(BigReal, BigReal)],
    pruned_subset: bool,
) -> Result<BoxDimension> {
    if intervals.is_empty() {
        return Err(Error::InvalidInput(
            "box dimension of an empty family".into(),
        ));
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|a, b| {
        a.0.as_float()
            .partial_cmp(b.0.as_float())
            .expect("finite endpoints")
    });
    let prec = sorted
        .iter()
        .map(|(a, b)| a.precision_bits().max(b.precision_bits()))
        .max()
        .unwrap_or(64);
    let hull_lo = sorted[0].0.as_float();
    let hull_hi = sorted
        .iter()
        .map(|p| p.1.as_float())
        .fold(hull_lo, |m, x| if x > m { x } else { m });
    let hull = Float::with_val(prec, hull_hi - hull_lo);
    let min_len = sorted
        .iter()
        .map(|(a, b)| Float::with_val(prec, b.as_float() - a.as_float()))
        .fold(hull.clone(), |m, x| if x < m { x } else { m });
    if !(hull > 0) {
        return Err(Error::InsufficientScales { found: 0 });
    }
    let log_hull = log2_of(&hull);
    let floor = log_hull - f64::from(MAX_OCTAVES_BELOW_HULL);
    // Degenerate (point) intervals carry no scale of their own.
    let log_small = if min_len > 0 {
        log2_of(&min_len).min(floor)
    } else {
        floor
    };
    let j_first = (-log_hull).floor() as i32 + FIRST_OCTAVE;
    let j_last = (-log_small).floor() as i32;
    let found = (j_last - j_first + 1).max(0) as usize;
    if found < 3 {
        return Err(Error::InsufficientScales { found });
    }
    let counts: Vec<(i32, Integer)> = (j_first..=j_last)
        .map(|j| (j, box_count(&sorted, j)))
        .collect();
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .map(|(j, c)| (f64::from(*j), log2_of(&Float::with_val(64, c))))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(BoxDimension {
        estimate: sxy / sxx,
        counts,
        pruned_subset,
    })
}

/// Intervals of the middle-thirds construction at `depth`, exactly.
pub fn middle_thirds(depth: u32) -> Vec<(BigReal, BigReal)> {
    let denom = Integer::from(Integer::u_pow_u(3, depth));
    let prec = 2 * denom.significant_bits() + 64;
    let mut starts = vec![Integer::new()];
    for level in 0..depth {
        let step = Integer::from(Integer::u_pow_u(3, depth - level - 1));
        starts = starts
            .into_iter()
            .flat_map(|s| [s.clone(), s + Integer::from(&step * 2)])
            .collect();
    }
    starts
        .into_iter()
        .map(|s| {
            let lo = Float::with_val(prec, &s) / &denom;
            let hi = Float::with_val(prec, s + 1u32) / &denom;
            (BigReal::from_float(lo), BigReal::from_float(hi))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> (BigReal, BigReal) {
        (BigReal::from_f64(a, 64), BigReal::from_f64(b, 64))
    }

    #[test]
    fn single_interval_has_dimension_one() {
        let d = box_dimension(&[iv(0.0, 1.0)], false).unwrap();
        assert!((d.estimate - 1.0).abs() < 0.05, "{}", d.estimate);
        let lo = BigReal::from_f64(0.3, 256);
        let hi = &lo + &BigReal::from_f64(1e-40, 256);
        let d = box_dimension(&[(lo, hi)], false).unwrap();
        assert!((d.estimate - 1.0).abs() < 0.05, "{}", d.estimate);
    }

    #[test]
    fn middle_thirds_dimension() {
        let d = box_dimension(&middle_thirds(8), false).unwrap();
        assert!(
            (d.estimate - 2f64.ln() / 3f64.ln()).abs() < 0.05,
            "{}",
            d.estimate
        );
    }

    #[test]
    fn finite_point_set_has_dimension_zero() {
        let pts: Vec<_> = (0..5).map(|i| iv(i as f64 / 4.0, i as f64 / 4.0)).collect();
        let d = box_dimension(&pts, false).unwrap();
        assert!(d.estimate.abs() < 0.2, "{}", d.estimate);
    }

    #[test]
    fn counts_merge_shared_boxes() {
        let s = vec![iv(0.0, 0.25), iv(0.25, 0.5)];
        assert_eq!(box_count(&s, 2), 3);
        assert_eq!(box_count(&s, 1), 2);
    }

    #[test]
    fn too_few_scales() {
        assert!(matches!(
            box_dimension(&[iv(0.3, 0.3)], false),
            Err(Error::InsufficientScales { found: 0 })
        ));
        assert!(box_dimension(&[], false).is_err());
    }

    #[test]
    fn flag_is_carried() {
        assert!(
            box_dimension(&middle_thirds(4), true)
                .unwrap()
                .pruned_subset
        );
    }
}
