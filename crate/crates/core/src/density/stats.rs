use crate::error::{Error, Result};
use crate::precision::Frac;

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty residue list".into()));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!("residue {v} outside [0, 1)")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn residue_values(fracs: &[Frac]) -> Vec<f64> {
    fracs.iter().map(Frac::value_f64).collect()
}

/// Largest gap between neighbouring residues on the circle `R/Z`.
pub fn max_gap_values(values: &[f64]) -> Result<f64> {
    let v = sorted(values)?;
    let wrap = 1.0 - v[v.len() - 1] + v[0];
    Ok(v.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max))
}

pub fn max_gap(fracs: &[Frac]) -> Result<f64> {
    max_gap_values(&residue_values(fracs))
}

/// `sup_x |#{x_i < x}/n − x|`, from the sorted sample:
/// `max_i max(i/n − x_(i), x_(i) − (i−1)/n)`.
pub fn star_discrepancy_values(values: &[f64]) -> Result<f64> {
    let v = sorted(values)?;
    let n = v.len() as f64;
    Ok(v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max))
}

pub fn star_discrepancy(fracs: &[Frac]) -> Result<f64> {
    star_discrepancy_values(&residue_values(fracs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point() {
        assert_eq!(max_gap_values(&[0.3]).unwrap(), 1.0);
    }

    #[test]
    fn quarter_grid() {
        let v = [0.0, 0.25, 0.5, 0.75];
        assert_eq!(max_gap_values(&v).unwrap(), 0.25);
        assert_eq!(star_discrepancy_values(&v).unwrap(), 0.25);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(max_gap_values(&[]).is_err());
        assert!(star_discrepancy_values(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn discrepancy_bounds(v in proptest::collection::vec(0.0f64..1.0, 1..200)) {
            let d = star_discrepancy_values(&v).unwrap();
            prop_assert!(d >= 0.5 / v.len() as f64 - 1e-12 && d <= 1.0);
            let g = max_gap_values(&v).unwrap();
            prop_assert!(g >= 1.0 / v.len() as f64 - 1e-12 && g <= 1.0);
        }

        #[test]
        fn rotation_keeps_gaps(v in proptest::collection::vec(0.0f64..1.0, 2..100), c in 0.0f64..1.0) {
            let rotated: Vec<f64> = v.iter().map(|x| (x + c).rem_euclid(1.0) % 1.0).collect();
            let a = max_gap_values(&v).unwrap();
            let b = max_gap_values(&rotated).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
