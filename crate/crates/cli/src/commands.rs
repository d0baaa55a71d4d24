use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use expexp_core::cantor::{
    box_dimension, build_tree, choose_config_with, export_theta, mdp_check, middle_thirds,
    middle_thirds_partitions, theta_avoidance, ComponentTree,
};
use expexp_core::density::{
    max_gap, paint_until_covered, star_discrepancy, witness_batch, AnnulusGrid, ChampernowneLine,
};
use expexp_core::distribution::estimate_mu_t;
use expexp_core::precision::{Frac, Real};
use expexp_core::spiral::{crossing, frac_sequence, ObliqueLine};
use expexp_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{LinePreset, RunConfig};
use crate::render::{self, RenderSpec, Window};

pub enum Outcome {
    Ok,
    CheckFailed(String),
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

/// The configured line; the Champernowne preset gets a digit prefix long
/// enough for `crossings` outward crossings.
fn line(cfg: &RunConfig, crossings: u64) -> Result<ObliqueLine> {
    Ok(match cfg.line {
        LinePreset::Custom => ObliqueLine::parse(&cfg.p_re, &cfg.p_im, &cfg.alpha)?,
        LinePreset::Champernowne => {
            ChampernowneLine::for_crossings(crossings.max(2), cfg.guard_bits)?
                .line()
                .clone()
        }
    })
}

fn significant_digits(bits: u32) -> usize {
    (f64::from(bits) * std::f64::consts::LOG10_2).ceil() as usize + 1
}

/// Enough digits that rounding stays far below the stated error bound.
fn frac_digits(f: &Frac) -> usize {
    let cap = significant_digits(f.value().precision_bits());
    let e = f.error_f64();
    if e > 0.0 {
        ((-e.log10()).ceil() as usize + 3).clamp(17, cap.max(17))
    } else {
        cap
    }
}

fn frac_text(f: &Frac) -> String {
    f.value().to_decimal(frac_digits(f))
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

pub fn run(command: &str, cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    match command {
        "crossings" => crossings(cfg, out),
        "fracs" => fracs(cfg, out),
        "gaps" => gaps(cfg, out),
        "coverage" => coverage(cfg, out),
        "witness" => witness(cfg, out),
        "cantor" => cantor(cfg, out),
        "mdp" => mdp(cfg, out),
        "theta" => theta(cfg, out),
        "distribution" => distribution(cfg, out),
        "sample-thm1" => sample_thm1(cfg, out),
        "render" => render_cmd(cfg, out),
        other => bail!("unknown command {other:?}"),
    }
}

fn crossings(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    if cfg.k_min > cfg.k_max {
        bail!("k_min {} exceeds k_max {}", cfg.k_min, cfg.k_max);
    }
    let reach = cfg.k_min.unsigned_abs().max(cfg.k_max.unsigned_abs()) + 1;
    let line = line(cfg, reach)?;
    let mut s = String::new();
    for k in cfg.k_min..=cfg.k_max {
        let c = crossing(&line, k, cfg.guard_bits)?;
        // Fields in a fixed order; serde_json's map would sort them.
        let _ = writeln!(
            s,
            "{{\"k\":{k},\"t\":{},\"log_radius\":{},\"frac\":{},\"err\":{}}}",
            json!(c.t_k.to_decimal(significant_digits(c.t_k.precision_bits()))),
            json!(c
                .log_radius
                .to_decimal(significant_digits(c.log_radius.precision_bits()))),
            json!(frac_text(&c.frac)),
            json!(format!("{:e}", c.frac.error_f64())),
        );
    }
    emit(out, s.as_bytes())?;
    Ok(Outcome::Ok)
}

fn residues(cfg: &RunConfig) -> Result<(ObliqueLine, Vec<Frac>)> {
    let line = line(cfg, cfg.count)?;
    let fracs = frac_sequence(&line, usize::try_from(cfg.count)?, cfg.guard_bits)?;
    Ok((line, fracs))
}

fn fracs(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let (line, fracs) = residues(cfg)?;
    let rows = fracs
        .iter()
        .enumerate()
        .map(|(j, f)| {
            vec![
                line.outward_index(j as u64).to_string(),
                frac_text(f),
                format!("{:e}", f.error_f64()),
            ]
        })
        .collect();
    emit(out, &csv_bytes(&["k", "frac", "error_bound"], rows)?)?;
    Ok(Outcome::Ok)
}

fn gaps(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let (_, fracs) = residues(cfg)?;
    let n = fracs.len();
    let mut ks: Vec<usize> = (4..).map(|e| 1usize << e).take_while(|&k| k < n).collect();
    ks.push(n);
    let mut rows = Vec::new();
    for k in ks {
        let part = &fracs[..k];
        rows.push(vec![
            k.to_string(),
            max_gap(part)?.to_string(),
            star_discrepancy(part)?.to_string(),
        ]);
    }
    emit(
        out,
        &csv_bytes(&["K", "max_gap", "star_discrepancy"], rows)?,
    )?;
    Ok(Outcome::Ok)
}

fn coverage(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let line = line(cfg, cfg.count)?;
    let grid = AnnulusGrid::new(cfg.radius, cfg.n_logr, cfg.n_theta)?;
    let (grid, full_at) =
        paint_until_covered(&line, usize::try_from(cfg.count)?, grid, cfg.guard_bits)?;
    emit(out, grid.to_pbm().as_bytes())?;
    match full_at {
        Some(k) => eprintln!(
            "covered at resolution {}x{} after K = {k} crossings",
            cfg.n_logr, cfg.n_theta
        ),
        None => eprintln!(
            "not covered at resolution {}x{} within K = {}: fraction {}",
            cfg.n_logr,
            cfg.n_theta,
            cfg.count,
            grid.covered_fraction()
        ),
    }
    Ok(Outcome::Ok)
}

/// Targets uniform in log-modulus and angle over the annulus `1/R ≤ |w| ≤ R`.
pub fn annulus_targets(seed: u64, count: usize, radius: f64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = radius.ln();
    (0..count)
        .map(|_| {
            let m = (l * (2.0 * rng.random::<f64>() - 1.0)).exp();
            let a = TAU * rng.random::<f64>();
            (m * a.cos(), m * a.sin())
        })
        .collect()
}

/// Digits of `t` that keep `ρ(t)` well inside `eps`: `|ρ'(t)|` is about
/// `|ρ| e^{x + αt}`, so each unit of `log r` costs `1/ln 10` digits.
fn witness_digits(line: &ObliqueLine, t: &expexp_core::precision::BigReal, eps: f64) -> usize {
    let tf = t.to_f64();
    let lr = (line.p_re().approx() + line.alpha().approx() * tf).max(0.0);
    let d = lr / std::f64::consts::LN_10 + tf.abs().max(1.0).log10() - eps.log10() + 8.0;
    (d.ceil() as usize).clamp(17, significant_digits(t.precision_bits()))
}

fn witness(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let line = line(cfg, cfg.count)?;
    let targets = if cfg.targets == 0 {
        vec![(cfg.target_re, cfg.target_im)]
    } else {
        if !(cfg.radius > 1.0) {
            bail!("radius must exceed 1 for random targets");
        }
        annulus_targets(cfg.seed, cfg.targets, cfg.radius)
    };
    let found = witness_batch(&line, &targets, cfg.eps, cfg.count)?;
    let mut s = String::new();
    let mut missing = 0;
    for (&(re, im), r) in targets.iter().zip(found) {
        let rec = match r {
            Ok(w) => json!({
                "target_re": re,
                "target_im": im,
                "t": w.t.to_decimal(witness_digits(&line, &w.t, cfg.eps)),
                "crossing": w.crossing,
                "residual": w.residual,
                "verify_bits": w.verify_bits,
            }),
            Err(e @ Error::NotFound { .. }) => {
                missing += 1;
                json!({ "target_re": re, "target_im": im, "error": e.to_string() })
            }
            Err(e) => return Err(e.into()),
        };
        s.push_str(&rec.to_string());
        s.push('\n');
    }
    emit(out, s.as_bytes())?;
    if missing > 0 {
        return Ok(Outcome::CheckFailed(format!(
            "{missing} of {} targets have no witness",
            targets.len()
        )));
    }
    Ok(Outcome::Ok)
}

fn read_tree(path: &Path) -> Result<ComponentTree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ComponentTree::from_text(&text)?)
}

fn cantor(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    if cfg.depth == 0 {
        bail!("depth must be at least 1");
    }
    let tree = if let Some(path) = &cfg.tree_in {
        let mut tree = read_tree(path)?;
        while tree.depth() < cfg.depth {
            tree.refine(cfg.guard_bits)?;
        }
        tree
    } else {
        let (p_re, p_im) = (Real::parse(&cfg.p_re)?, Real::parse(&cfg.p_im)?);
        match cfg.n_min {
            Some(n) => {
                let config =
                    choose_config_with(p_re, p_im, cfg.alpha0, cfg.alpha1, cfg.cap, Some(n))?;
                let mut tree = ComponentTree::seed(config, cfg.guard_bits)?;
                while tree.depth() < cfg.depth {
                    tree.refine(cfg.guard_bits)?;
                }
                tree
            }
            None => build_tree(
                p_re,
                p_im,
                cfg.alpha0,
                cfg.alpha1,
                cfg.cap,
                cfg.depth,
                cfg.guard_bits,
            )?,
        }
    };
    emit(out, tree.to_text().as_bytes())?;
    let n = f64::from(tree.config.n);
    let sizes: Vec<usize> = (1..=tree.depth()).map(|d| tree.nodes(d).len()).collect();
    let survival = tree.min_survival();
    let ratio = tree.max_weight_ratio();
    eprintln!(
        "N = {}, k0 = {}, sizes {:?}, min survival {}, max weight ratio {}",
        tree.config.n,
        tree.config.k0,
        sizes,
        survival.map_or("-".to_string(), |s| s.to_string()),
        ratio
    );
    let mut failures = Vec::new();
    if let Some(s) = survival {
        if s < 1.0 - 4.0 / n {
            failures.push(format!("survival {s} < 1 - 4/N"));
        }
    }
    if ratio > 1.0 + 1e-9 {
        failures.push(format!("weight ratio {ratio} > 1"));
    }
    if cfg.verify {
        let rep = tree.verify_avoidance(tree.depth(), cfg.guard_bits)?;
        eprintln!(
            "avoidance: {} points, {} residues, min clearance {:e}, {} violations",
            rep.points,
            rep.residues,
            rep.min_clearance,
            rep.violations.len()
        );
        if !rep.violations.is_empty() {
            failures.push(format!("{} window hits", rep.violations.len()));
        }
    }
    Ok(if failures.is_empty() {
        Outcome::Ok
    } else {
        Outcome::CheckFailed(failures.join("; "))
    })
}

fn mdp(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let (partitions, eps, intervals, pruned) = if let Some(path) = &cfg.tree_in {
        let tree = read_tree(path)?;
        let eps = cfg.mdp_eps.unwrap_or(5.0 / f64::from(tree.config.n));
        let ivs = tree
            .deepest()
            .iter()
            .map(|w| (w.lo.clone(), w.hi.clone()))
            .collect::<Vec<_>>();
        (tree.partitions(), eps, ivs, true)
    } else if let Some(d) = cfg.fixture_depth {
        let eps = cfg
            .mdp_eps
            .ok_or_else(|| anyhow!("the middle-thirds fixture needs mdp_eps"))?;
        (
            middle_thirds_partitions(d as usize),
            eps,
            middle_thirds(d),
            false,
        )
    } else {
        bail!("mdp needs tree_in or fixture_depth");
    };
    let r = mdp_check(&partitions, eps, cfg.beta);
    let (vd, vi) = r
        .violation
        .map_or((String::new(), String::new()), |(d, i)| {
            (d.to_string(), i.to_string())
        });
    let row = vec![
        r.pass.to_string(),
        r.bound.map_or(String::new(), |b| b.to_string()),
        r.worst_log_excess.to_string(),
        vd,
        vi,
    ];
    emit(
        out,
        &csv_bytes(
            &[
                "pass",
                "bound",
                "worst_log_excess",
                "violation_depth",
                "violation_index",
            ],
            vec![row],
        )?,
    )?;
    match box_dimension(&intervals, pruned) {
        Ok(b) => eprintln!(
            "box dimension estimate {}{}",
            b.estimate,
            if b.pruned_subset {
                " (pruned subset)"
            } else {
                ""
            }
        ),
        Err(e) => eprintln!("box dimension unavailable: {e}"),
    }
    Ok(if r.pass {
        Outcome::Ok
    } else {
        Outcome::CheckFailed(format!(
            "mass distribution check failed at {:?}",
            r.violation
        ))
    })
}

const THETA_BITS: u32 = 256;

fn theta(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let Some(path) = &cfg.tree_in else {
        let alpha = Real::parse(&cfg.alpha)?.eval(THETA_BITS);
        let theta = export_theta(&alpha)?;
        let row = vec![alpha.to_decimal(30), theta.to_decimal(30)];
        emit(out, &csv_bytes(&["alpha", "theta"], vec![row])?)?;
        return Ok(Outcome::Ok);
    };
    let tree = read_tree(path)?;
    let c = &tree.config;
    // On this base point crossing 2j sits at 2π θ^j i, so powers of θ
    // inherit the tree's window.
    let on_base =
        (c.p_re.approx() - TAU.ln()).abs() < 1e-12 && (c.p_im.approx() - PI / 2.0).abs() < 1e-12;
    if !on_base || c.conjugated {
        bail!("the power check needs a tree built at p = log(2pi) + i pi/2 with positive slopes");
    }
    let k_max = tree.depth() as u64 * u64::from(c.n) / 2;
    let mut rows = Vec::new();
    let mut bad = 0;
    for alpha in tree.sample_parameters(usize::try_from(cfg.count)?) {
        let theta = export_theta(&alpha.with_precision(alpha.precision_bits().max(THETA_BITS)))?;
        let chk = theta_avoidance(
            &alpha,
            k_max,
            c.center_residue(),
            c.window_half_width(),
            cfg.guard_bits,
        )?;
        bad += usize::from(!chk.violations.is_empty());
        rows.push(vec![
            alpha.to_decimal(30),
            theta.to_decimal(30),
            chk.checked.to_string(),
            format!("{:e}", chk.min_clearance),
            chk.violations.len().to_string(),
        ]);
    }
    emit(
        out,
        &csv_bytes(
            &["alpha", "theta", "checked", "min_clearance", "violations"],
            rows,
        )?,
    )?;
    Ok(if bad == 0 {
        Outcome::Ok
    } else {
        Outcome::CheckFailed(format!("{bad} parameters hit the window"))
    })
}

fn distribution(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let line = ObliqueLine::parse(&cfg.p_re, &cfg.p_im, &cfg.alpha)?;
    let mut rows = Vec::new();
    for &t in &cfg.t {
        let e = estimate_mu_t(&line, t, cfg.samples, cfg.m_threshold, cfg.eta)?;
        rows.push(vec![
            t.to_string(),
            e.m_threshold.to_string(),
            e.eta.to_string(),
            e.mass_0.to_string(),
            e.mass_1.to_string(),
            e.mass_inf.to_string(),
            e.mass_other.to_string(),
        ]);
        eprintln!(
            "T = {t}: distance to limit {}, sampling error {}",
            e.distance_to_limit(),
            e.sampling_error()
        );
    }
    emit(
        out,
        &csv_bytes(
            &[
                "T",
                "M",
                "eta",
                "mass_0",
                "mass_1",
                "mass_inf",
                "mass_other",
            ],
            rows,
        )?,
    )?;
    Ok(Outcome::Ok)
}

/// Slopes uniform in `(alpha_min, alpha_max)` from a seeded generator.
pub fn sample_slopes(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect()
}

fn sample_thm1(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    if cfg.lines == 0 || !(cfg.alpha_min < cfg.alpha_max) {
        bail!("need lines > 0 and alpha_min < alpha_max");
    }
    let (p_re, p_im) = (Real::parse(&cfg.p_re)?, Real::parse(&cfg.p_im)?);
    let mut rows = Vec::new();
    let mut fractions = Vec::new();
    for a in sample_slopes(cfg.seed, cfg.lines, cfg.alpha_min, cfg.alpha_max) {
        let line = ObliqueLine::new(p_re.clone(), p_im.clone(), Real::from_f64(a));
        let grid = AnnulusGrid::new(cfg.radius, cfg.n_logr, cfg.n_theta)?;
        let (grid, full_at) =
            paint_until_covered(&line, usize::try_from(cfg.count)?, grid, cfg.guard_bits)?;
        let f = grid.covered_fraction();
        fractions.push(f);
        rows.push(vec![
            a.to_string(),
            f.to_string(),
            full_at.map_or(String::new(), |k| k.to_string()),
        ]);
    }
    emit(
        out,
        &csv_bytes(&["alpha", "covered_fraction", "crossings_to_full"], rows)?,
    )?;
    let (median, above) = coverage_summary(&fractions);
    eprintln!(
        "median covered fraction {median}, {above}/{} lines above 0.95",
        fractions.len()
    );
    let need = (fractions.len() * 9).div_ceil(10);
    if median >= 0.99 && above >= need {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "median {median} (need 0.99), {above} above 0.95 (need {need})"
        )))
    }
}

/// Median and the number of fractions above 0.95.
pub fn coverage_summary(fractions: &[f64]) -> (f64, usize) {
    let mut v = fractions.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    (median, v.iter().filter(|&&f| f > 0.95).count())
}

fn render_cmd(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let line = render::parse_line(&cfg.p_re, &cfg.p_im, &cfg.alpha)?;
    let spec = RenderSpec {
        curve: &cfg.curve,
        line: &line,
        window: cfg.window.map(Window::from_array),
        resolution: cfg.resolution,
        t_min: cfg.t_min,
        t_max: cfg.t_max,
        radius: cfg.radius,
        alpha0: cfg.alpha0,
        alpha1: cfg.alpha1,
    };
    emit(out, render::build(&spec)?.to_svg().as_bytes())?;
    Ok(Outcome::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use expexp_core::precision::BigReal;

    #[test]
    fn targets_are_seeded_and_in_the_annulus() {
        let a = annulus_targets(7, 50, std::f64::consts::E);
        assert_eq!(a, annulus_targets(7, 50, std::f64::consts::E));
        for (x, y) in a {
            let m = x.hypot(y);
            assert!(m >= (-1.0f64).exp() - 1e-12 && m <= 1f64.exp() + 1e-12);
        }
    }

    #[test]
    fn median_and_tail_count() {
        assert_eq!(coverage_summary(&[0.5, 1.0, 0.97]), (0.97, 2));
        assert_eq!(coverage_summary(&[0.9, 1.0]).0, 0.95);
    }

    #[test]
    fn frac_digits_track_the_error() {
        let v = BigReal::from_f64(0.25, 200);
        let f = Frac::new(v, BigReal::from_f64(1e-30, 64)).unwrap();
        assert_eq!(frac_digits(&f), 33);
    }
}
