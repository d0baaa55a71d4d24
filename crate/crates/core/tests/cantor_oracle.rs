use std::f64::consts::PI;

use expexp_core::cantor::{build_tree, mdp_check, psi_k, ComponentTree};
use expexp_core::precision::Real;
use expexp_core::spiral::crossing;

fn tree() -> ComponentTree {
    build_tree(Real::zero(), Real::from_f64(0.4), 0.2, 0.3, 6, 3, 64).unwrap()
}

#[test]
fn axis_points_are_spiral_crossings() {
    let t = tree();
    let c = &t.config;
    for alpha in t.sample_parameters(5) {
        let line = t.line(&alpha);
        for k in [c.k0 + 1, 0, 7, 60, 149] {
            let a = psi_k(c, k, &alpha, 48).unwrap();
            let b = crossing(&line, k, 48).unwrap();
            assert_eq!(a.sign, b.sign);
            let d = a.frac.circular_distance(b.frac.value_f64());
            assert!(d < 1e-13, "k = {k}: {d:e}");
        }
    }
}

#[test]
fn derivatives_grow_on_every_node() {
    let t = tree();
    let c = &t.config;
    let k_top = 3 * i64::from(c.n);
    for node in t.nodes(3) {
        let a = node.lo.to_f64();
        for k in c.levels(c.k0, k_top) {
            if c.is_degenerate(k + 1) || (k as f64) <= c.p_im.approx().abs() / PI {
                continue;
            }
            assert!(c.log_dpsi(k + 1, a) - c.log_dpsi(k, a) > c.alpha0 * PI);
        }
    }
}

#[test]
fn resumed_refinement_matches_direct_build() {
    let t = tree();
    let mut shallow = build_tree(Real::zero(), Real::from_f64(0.4), 0.2, 0.3, 6, 2, 64).unwrap();
    shallow = ComponentTree::from_text(&shallow.to_text()).unwrap();
    shallow.refine(64).unwrap();
    assert_eq!(shallow.to_text(), t.to_text());
}

#[test]
fn certificate_holds() {
    let t = tree();
    let n = f64::from(t.config.n);
    assert!(t.min_survival().unwrap() >= 1.0 - 4.0 / n);
    assert!(t.max_weight_ratio() <= 1.0 + 1e-12);
    let r = mdp_check(&t.partitions(), 5.0 / n, 1.01);
    assert!(r.pass, "{r:?}");
    assert!((r.bound.unwrap() - (1.0 - 10.0 / n)).abs() < 1e-12);
    let rep = t.verify_avoidance(3, 48).unwrap();
    assert!(rep.violations.is_empty());
}

#[test]
fn negative_interval_runs_on_the_conjugate() {
    let t = build_tree(Real::zero(), Real::from_f64(-0.4), -0.3, -0.2, 4, 2, 64).unwrap();
    assert!(t.config.conjugated);
    assert_eq!(t.config.p_im.approx(), 0.4);
    assert!(t.verify_avoidance(2, 48).unwrap().violations.is_empty());
}
