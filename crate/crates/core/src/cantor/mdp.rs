//! Mass distribution check: `μ(P) ≤ β(1 + ε)^n |P|` for every piece `P` of
//! the `n`-th partition gives Hausdorff dimension at least `1 − 2ε`.

/// Outcome of [`mdp_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct MdpResult {
    pub pass: bool,
    /// `1 − 2ε` on a pass.
    pub bound: Option<f64>,
    /// First violation as `(n, piece index)`.
    pub violation: Option<(usize, usize)>,
    /// Largest `ln μ(P) − ln(β(1+ε)^n |P|)` seen; non-positive on a pass.
    pub worst_log_excess: f64,
}

/// `partitions[n − 1]` lists the pieces of the `n`-th partition as
/// `(ln |P|, ln μ(P))`; pieces of zero mass may be omitted. Each piece must
/// also satisfy `|P| ≤ 2^{−n}`.
pub fn mdp_check(partitions: &[Vec<(f64, f64)>], eps: f64, beta: f64) -> MdpResult {
    let (log_beta, log_growth) = (beta.ln(), eps.ln_1p());
    let mut worst = f64::NEG_INFINITY;
    let mut violation = None;
    for (i, level) in partitions.iter().enumerate() {
        let n = i + 1;
        let shrink = -(n as f64) * std::f64::consts::LN_2;
        for (j, &(log_len, log_mass)) in level.iter().enumerate() {
            let excess = log_mass - (log_beta + n as f64 * log_growth + log_len);
            worst = worst.max(excess);
            let too_long = log_len > shrink + 1e-12;
            if (excess > 1e-12 || too_long) && violation.is_none() {
                violation = Some((n, j));
            }
        }
    }
    let ok = eps > 0.0 && eps < 1.0 && beta >= 1.0 && violation.is_none();
    MdpResult {
        pass: ok,
        bound: ok.then_some(1.0 - 2.0 * eps),
        violation,
        worst_log_excess: worst,
    }
}

/// Partitions of the middle-thirds construction with its natural measure,
/// in the form expected by [`mdp_check`].
pub fn middle_thirds_partitions(depth: usize) -> Vec<Vec<(f64, f64)>> {
    (1..=depth)
        .map(|n| {
            let piece = (-(n as f64) * 3f64.ln(), -(n as f64) * 2f64.ln());
            vec![piece; 1 << n]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic_lebesgue(depth: usize) -> Vec<Vec<(f64, f64)>> {
        (1..=depth)
            .map(|n| vec![(-(n as f64) * 2f64.ln(), -(n as f64) * 2f64.ln()); 1 << n])
            .collect()
    }

    #[test]
    fn lebesgue_passes_with_beta_one() {
        for eps in [0.01, 0.2, 0.45] {
            let r = mdp_check(&dyadic_lebesgue(10), eps, 1.0);
            assert!(r.pass);
            assert_eq!(r.bound, Some(1.0 - 2.0 * eps));
        }
    }

    #[test]
    fn atom_fails() {
        // All mass in the dyadic piece containing 0.
        let parts: Vec<Vec<(f64, f64)>> = (1..=10)
            .map(|n| vec![(-(n as f64) * 2f64.ln(), 0.0)])
            .collect();
        let r = mdp_check(&parts, 0.1, 1.0);
        assert!(!r.pass);
        assert_eq!(r.violation, Some((1, 0)));
    }

    #[test]
    fn middle_thirds_crossover() {
        let parts = middle_thirds_partitions(12);
        assert!(mdp_check(&parts, 0.5, 1.0).pass);
        assert!(!mdp_check(&parts, 0.49, 1.0).pass);
        // Any passing eps gives a bound ≤ 0.
        assert!(mdp_check(&parts, 0.5, 1.0).bound.unwrap() <= 0.0);
        // Bisection for the crossover lands on 1/2.
        let (mut lo, mut hi) = (0.0, 0.99);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if mdp_check(&parts, mid, 1.0).pass {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((hi - 0.5).abs() < 1e-9);
    }

    #[test]
    fn long_pieces_fail() {
        let parts = vec![vec![(0.0, 0.0)]];
        assert!(!mdp_check(&parts, 0.5, 2.0).pass);
    }
}
