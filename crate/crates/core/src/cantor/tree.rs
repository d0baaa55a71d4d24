use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use rug::{float::Round, Float};

use super::config::{choose_config_with, CantorConfig};
use super::sweep::{level_at, sweep, Level};
use crate::error::{Error, Result};
use crate::precision::{scaled_integer, BigReal, Real};
use crate::spiral::{crossing, frac_sequence, ObliqueLine};

/// Times the block length is doubled after an extinction before giving up.
const MAX_RETRIES: usize = 3;

/// One interval of the construction.
///
/// A node at depth `n` avoids the forbidden windows for every level
/// `k0 < k ≤ nN`. `weight` is its mass; `plus_lb` and `survival_lb` are set
/// once the node has been refined.
#[derive(Clone, Debug)]
pub struct Node {
    pub depth: u32,
    pub parent: Option<usize>,
    pub lo: BigReal,
    pub hi: BigReal,
    /// `|ψ_{nN}(W)|`.
    pub psi_len: f64,
    pub weight: f64,
    /// Certified lower bound on the measure of the unpruned survivors `W⁺`.
    pub plus_lb: Option<f64>,
    pub survival_lb: Option<f64>,
}

impl Node {
    pub fn length(&self) -> f64 {
        Float::with_val(64, self.hi.as_float() - self.lo.as_float()).to_f64()
    }

    pub fn midpoint(&self) -> BigReal {
        let prec = self.lo.precision_bits().max(self.hi.precision_bits()) + 1;
        BigReal::from_float(Float::with_val(prec, self.lo.as_float() + self.hi.as_float()) >> 1u32)
    }
}

/// Nested interval families, one per depth; `levels[0]` holds depth 1.
#[derive(Clone, Debug)]
pub struct ComponentTree {
    pub config: CantorConfig,
    pub seed: (BigReal, BigReal),
    levels: Vec<Vec<Node>>,
}

/// Arc-avoidance check of retained intervals against the spiral crossings.
#[derive(Clone, Debug, Default)]
pub struct AvoidanceReport {
    pub points: usize,
    pub residues: usize,
    /// Smallest `distance − half-width − error` over all checks.
    pub min_clearance: f64,
    /// `(node index, crossing)` pairs that entered the window.
    pub violations: Vec<(usize, i64)>,
}

fn dyadic(x: &Float, bits: u32, round: Round) -> BigReal {
    let i = scaled_integer(x, bits, round);
    let prec = (i.significant_bits() + 2).max(64);
    BigReal::from_float(Float::with_val(prec, &i) >> bits)
}

struct Children {
    kids: Vec<(BigReal, BigReal, f64, f64)>,
    plus_lb: f64,
}

/// Lower bound on the measure of `W⁺`: `|W|` minus what the windows and the
/// short components can remove, each estimated from `|Dψ_k|` on `W`.
fn survivor_lower_bound(config: &CantorConfig, levels: &[Level], top: &Level, width: f64) -> f64 {
    let window = config.i_length + 4.0 * std::f64::consts::PI * config.margin;
    let min_d = |l: &Level| (l.c.abs().ln() + l.y0_log + (l.c * width).min(0.0)).exp();
    let image = |l: &Level| l.log_image_len(0.0, width).exp();
    let arc_loss: f64 = levels
        .iter()
        .map(|l| (width * (l.c.abs() * width).exp() / TAU + 2.0 / min_d(l)) * window)
        .sum();
    let n2 = f64::from(config.n).powi(2);
    let cuts: f64 = levels
        .iter()
        .filter(|l| l.k != top.k)
        .map(|l| image(l) / TAU + 2.0)
        .sum();
    let short_loss = (2.0 * cuts + 2.0) / n2 / min_d(top);
    width - arc_loss - short_loss
}

/// Components of `[lo, hi]` that avoid the windows of `ks`, with their top
/// images at least `1/N²`: the first `2·cap` in sweep order, pruned to the
/// `cap` widest. Endpoints are rounded inward to the dyadic grid.
fn components(
    config: &CantorConfig,
    lo: &BigReal,
    hi: &BigReal,
    ks: &[i64],
    guard_bits: u32,
) -> Result<Children> {
    let left = lo.as_float();
    let levels = ks
        .iter()
        .map(|&k| level_at(config, k, left, guard_bits))
        .collect::<Result<Vec<_>>>()?;
    let top = *levels
        .last()
        .ok_or_else(|| Error::InvalidInput("no levels to refine".into()))?;
    let width = Float::with_val(64, hi.as_float() - left).to_f64();
    let half = config.window_half_width() + config.margin;
    let n = f64::from(config.n);
    let cap = config.component_cap;
    let mut comps = sweep(&levels, &top, width, half, -2.0 * n.ln(), 2 * cap);
    if comps.len() > cap {
        let mut by_width: Vec<usize> = (0..comps.len()).collect();
        by_width.sort_by(|&i, &j| (comps[j].1 - comps[j].0).total_cmp(&(comps[i].1 - comps[i].0)));
        let mut keep = vec![false; comps.len()];
        for &i in &by_width[..cap] {
            keep[i] = true;
        }
        let mut it = keep.iter();
        comps.retain(|_| *it.next().unwrap());
    }
    let bits = config.dyadic_bits;
    let prec = bits + 64;
    let mut kids = Vec::with_capacity(comps.len());
    for (s, e) in comps {
        let a = dyadic(&Float::with_val(prec, left + s), bits, Round::Up);
        let mut b = if e >= width {
            hi.clone()
        } else {
            dyadic(&Float::with_val(prec, left + e), bits, Round::Down)
        };
        if b.as_float() > hi.as_float() {
            b = hi.clone();
        }
        if a.as_float() >= b.as_float() {
            continue;
        }
        let len = Float::with_val(64, b.as_float() - a.as_float()).to_f64();
        let psi_len = top.log_image_len(s, s + len).exp();
        kids.push((a, b, len, psi_len));
    }
    Ok(Children {
        kids,
        plus_lb: survivor_lower_bound(config, &levels, &top, width),
    })
}

impl ComponentTree {
    /// Depth 1: the widest admissible component `V` of the seed interval
    /// `J′` (length `1/N²`, centred in `J`) for the levels `k0 < k ≤ N`.
    pub fn seed(config: CantorConfig, guard_bits: u32) -> Result<Self> {
        let bits = config.dyadic_bits;
        let prec = bits + 64;
        let center = Float::with_val(prec, config.alpha0 + config.alpha1) >> 1u32;
        let half = Float::with_val(
            prec,
            Float::with_val(prec, f64::from(config.n)).square().recip(),
        ) >> 1u32;
        let lo = dyadic(&Float::with_val(prec, &center - &half), bits, Round::Up);
        let hi = dyadic(&Float::with_val(prec, &center + &half), bits, Round::Down);
        let ks = config.levels(config.k0, i64::from(config.n));
        let found = components(&config, &lo, &hi, &ks, guard_bits)?;
        let v = found
            .kids
            .into_iter()
            .max_by(|x, y| x.2.total_cmp(&y.2))
            .ok_or(Error::Extinction { depth: 1 })?;
        let node = Node {
            depth: 1,
            parent: None,
            weight: v.2,
            lo: v.0,
            hi: v.1,
            psi_len: v.3,
            plus_lb: None,
            survival_lb: None,
        };
        Ok(ComponentTree {
            config,
            seed: (lo, hi),
            levels: vec![vec![node]],
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Nodes at depth `n ≥ 1`.
    pub fn nodes(&self, depth: usize) -> &[Node] {
        &self.levels[depth - 1]
    }

    pub fn deepest(&self) -> &[Node] {
        self.levels.last().expect("a tree has at least one depth")
    }

    /// Adds depth `n + 1`. Parents are processed in parallel; weights follow
    /// `μ(A) = μ(W)|A|/m(W⁺)` with `m(W⁺)` replaced by its certified lower
    /// bound, so retained weights never understate the measure.
    pub fn refine(&mut self, guard_bits: u32) -> Result<()> {
        let depth = self.depth();
        let nn = i64::from(self.config.n);
        let ks = self
            .config
            .levels(depth as i64 * nn, (depth as i64 + 1) * nn);
        let config = &self.config;
        let results: Vec<Children> = self
            .deepest()
            .par_iter()
            .map(|w| components(config, &w.lo, &w.hi, &ks, guard_bits))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        let parents = self.levels.last_mut().expect("nonempty");
        for (i, (w, ch)) in parents.iter_mut().zip(results).enumerate() {
            w.plus_lb = Some(ch.plus_lb);
            w.survival_lb = Some(ch.plus_lb / w.length());
            for (lo, hi, len, psi_len) in ch.kids {
                next.push(Node {
                    depth: depth as u32 + 1,
                    parent: Some(i),
                    lo,
                    hi,
                    psi_len,
                    weight: w.weight * len / ch.plus_lb,
                    plus_lb: None,
                    survival_lb: None,
                });
            }
        }
        if next.is_empty() {
            return Err(Error::Extinction { depth: depth + 1 });
        }
        self.levels.push(next);
        Ok(())
    }

    /// Smallest certified survival proportion over all refined nodes.
    pub fn min_survival(&self) -> Option<f64> {
        self.levels
            .iter()
            .flatten()
            .filter_map(|n| n.survival_lb)
            .reduce(f64::min)
    }

    /// Largest `μ_n(W) / (|W|(1 − 4/N)^{−n+1})` over all nodes.
    pub fn max_weight_ratio(&self) -> f64 {
        let q = (1.0 - 4.0 / f64::from(self.config.n)).ln();
        self.levels
            .iter()
            .flatten()
            .map(|w| (w.weight.ln() - w.length().ln() + (f64::from(w.depth) - 1.0) * q).exp())
            .fold(0.0, f64::max)
    }

    /// `(depth, ln |W|, ln μ(W))` for every node, for the mass distribution check.
    pub fn partitions(&self) -> Vec<Vec<(f64, f64)>> {
        self.levels
            .iter()
            .map(|l| l.iter().map(|w| (w.length().ln(), w.weight.ln())).collect())
            .collect()
    }

    /// `count` evenly spread midpoints of the deepest intervals.
    pub fn sample_parameters(&self, count: usize) -> Vec<BigReal> {
        let nodes = self.deepest();
        let count = count.min(nodes.len());
        (0..count)
            .map(|i| nodes[i * nodes.len() / count].midpoint())
            .collect()
    }

    /// The line through the base point with parameter `alpha`.
    pub fn line(&self, alpha: &BigReal) -> ObliqueLine {
        ObliqueLine::new(
            self.config.p_re.clone(),
            self.config.p_im.clone(),
            Real::exact(alpha.clone()),
        )
    }

    /// Checks both endpoints and the midpoint of every interval at `depth`
    /// against the window, using the spiral's crossing residues for every
    /// level `k0 < k ≤ depth·N`.
    pub fn verify_avoidance(&self, depth: usize, guard_bits: u32) -> Result<AvoidanceReport> {
        let k_max = depth as i64 * i64::from(self.config.n);
        let rho_c = self.config.center_residue();
        let w = self.config.window_half_width();
        let k0 = self.config.k0;
        let per_node: Vec<AvoidanceReport> = self
            .nodes(depth)
            .par_iter()
            .enumerate()
            .map(|(i, node)| {
                let mut rep = AvoidanceReport {
                    min_clearance: f64::INFINITY,
                    ..Default::default()
                };
                for alpha in [node.lo.clone(), node.midpoint(), node.hi.clone()] {
                    let line = self.line(&alpha);
                    let mut fracs: Vec<(i64, _)> = Vec::new();
                    for k in (k0 + 1)..0 {
                        fracs.push((k, crossing(&line, k, guard_bits)?.frac));
                    }
                    if k_max >= 0 {
                        let seq = frac_sequence(&line, k_max as usize + 1, guard_bits)?;
                        fracs.extend(seq.into_iter().enumerate().map(|(k, f)| (k as i64, f)));
                    }
                    for (k, f) in fracs {
                        if k <= k0 || self.config.is_degenerate(k) {
                            continue;
                        }
                        let clearance = f.circular_distance(rho_c) - w - f.error_f64();
                        rep.min_clearance = rep.min_clearance.min(clearance);
                        rep.residues += 1;
                        if clearance <= 0.0 {
                            rep.violations.push((i, k));
                        }
                    }
                    rep.points += 1;
                }
                Ok(rep)
            })
            .collect::<Result<_>>()?;
        let mut out = AvoidanceReport {
            min_clearance: f64::INFINITY,
            ..Default::default()
        };
        for r in per_node {
            out.points += r.points;
            out.residues += r.residues;
            out.min_clearance = out.min_clearance.min(r.min_clearance);
            out.violations.extend(r.violations);
        }
        Ok(out)
    }

    /// Line-oriented text form: a `config` header followed by one `node` line
    /// per interval, depth by depth.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = format!(
            "config p_re={} p_im={} alpha0={} alpha1={} n={} k0={} i_length={} i_center={} c_lower={} m_upper={} cap={} dyadic_bits={} margin={} conjugated={}\n",
            c.p_re.label(),
            c.p_im.label(),
            c.alpha0,
            c.alpha1,
            c.n,
            c.k0,
            c.i_length,
            c.i_center,
            c.c_lower,
            c.m_upper,
            c.component_cap,
            c.dyadic_bits,
            c.margin,
            c.conjugated
        );
        let _ = writeln!(
            s,
            "seed {} {}",
            self.seed.0.to_hex_exact(),
            self.seed.1.to_hex_exact()
        );
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
        for node in self.levels.iter().flatten() {
            let _ = writeln!(
                s,
                "node {} {} {} {} {} {} {} {}",
                node.depth,
                node.parent.map_or("-".to_string(), |p| p.to_string()),
                node.lo.to_hex_exact(),
                node.hi.to_hex_exact(),
                node.psi_len,
                node.weight,
                opt(node.plus_lb),
                opt(node.survival_lb)
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse(format!("tree line {}: {msg}", line + 1));
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty tree".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("config") {
            return Err(bad(ln, "expected config header"));
        }
        let kv: std::collections::HashMap<&str, &str> =
            fields.filter_map(|f| f.split_once('=')).collect();
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| bad(ln, &format!("missing {k}")))
        };
        let num =
            |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(ln, &format!("bad {k}"))) };
        let int =
            |k: &str| -> Result<i64> { get(k)?.parse().map_err(|_| bad(ln, &format!("bad {k}"))) };
        let config = CantorConfig {
            p_re: Real::parse(get("p_re")?)?,
            p_im: Real::parse(get("p_im")?)?,
            alpha0: num("alpha0")?,
            alpha1: num("alpha1")?,
            n: int("n")? as u32,
            k0: int("k0")?,
            i_length: num("i_length")?,
            i_center: num("i_center")?,
            c_lower: num("c_lower")?,
            m_upper: num("m_upper")?,
            component_cap: int("cap")? as usize,
            dyadic_bits: int("dyadic_bits")? as u32,
            margin: num("margin")?,
            conjugated: get("conjugated")? == "true",
        };
        let (ln, seed_line) = lines
            .next()
            .ok_or_else(|| Error::Parse("missing seed line".into()))?;
        let sf: Vec<&str> = seed_line.split_whitespace().collect();
        if sf.len() != 3 || sf[0] != "seed" {
            return Err(bad(ln, "expected seed line"));
        }
        let seed = (
            BigReal::parse_hex_exact(sf[1], 64)?,
            BigReal::parse_hex_exact(sf[2], 64)?,
        );
        let mut levels: Vec<Vec<Node>> = Vec::new();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 9 || f[0] != "node" {
                return Err(bad(ln, "expected a node record with 8 fields"));
            }
            let float = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(ln, &format!("bad number {s}")))
            };
            let opt = |s: &str| {
                if s == "-" {
                    Ok(None)
                } else {
                    float(s).map(Some)
                }
            };
            let depth: u32 = f[1].parse().map_err(|_| bad(ln, "bad depth"))?;
            let parent = if f[2] == "-" {
                None
            } else {
                Some(f[2].parse().map_err(|_| bad(ln, "bad parent"))?)
            };
            if depth as usize != levels.len() && depth as usize != levels.len() + 1 || depth == 0 {
                return Err(bad(ln, "depths must be listed in order"));
            }
            if depth as usize == levels.len() + 1 {
                levels.push(Vec::new());
            }
            let parent_count = if depth > 1 {
                levels[depth as usize - 2].len()
            } else {
                0
            };
            if parent.is_some_and(|p| p >= parent_count) || (depth > 1 && parent.is_none()) {
                return Err(bad(ln, "parent index out of range"));
            }
            levels[depth as usize - 1].push(Node {
                depth,
                parent,
                lo: BigReal::parse_hex_exact(f[3], 64)?,
                hi: BigReal::parse_hex_exact(f[4], 64)?,
                psi_len: float(f[5])?,
                weight: float(f[6])?,
                plus_lb: opt(f[7])?,
                survival_lb: opt(f[8])?,
            });
        }
        if levels.is_empty() {
            return Err(Error::Parse("tree has no nodes".into()));
        }
        Ok(ComponentTree {
            config,
            seed,
            levels,
        })
    }
}

/// Chooses a configuration, seeds and refines to `depth`, doubling `N` after
/// an extinction.
pub fn build_tree(
    p_re: Real,
    p_im: Real,
    alpha0: f64,
    alpha1: f64,
    component_cap: usize,
    depth: usize,
    guard_bits: u32,
) -> Result<ComponentTree> {
    let mut min_n = None;
    let mut last = Error::Extinction { depth: 1 };
    for _ in 0..=MAX_RETRIES {
        let config = choose_config_with(
            p_re.clone(),
            p_im.clone(),
            alpha0,
            alpha1,
            component_cap,
            min_n,
        )?;
        let n = config.n;
        let attempt = ComponentTree::seed(config, guard_bits).and_then(|mut tree| {
            while tree.depth() < depth {
                tree.refine(guard_bits)?;
            }
            Ok(tree)
        });
        match attempt {
            Err(e @ Error::Extinction { .. }) => {
                last = e;
                min_n = Some(2 * n);
            }
            other => return other,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::config::choose_config;

    fn small_tree(depth: usize) -> ComponentTree {
        build_tree(Real::zero(), Real::zero(), 0.2, 0.3, 8, depth, 64).unwrap()
    }

    #[test]
    fn seed_is_centred_and_short() {
        let t = small_tree(1);
        let (lo, hi) = (t.seed.0.to_f64(), t.seed.1.to_f64());
        assert!((0.5 * (lo + hi) - 0.25).abs() < 1e-12);
        assert!((hi - lo - 1.0 / 2500.0).abs() < 1e-12);
        let v = &t.nodes(1)[0];
        assert!(v.lo.to_f64() >= lo && v.hi.to_f64() <= hi);
        assert_eq!(v.weight, v.length());
        assert!(v.psi_len >= 1.0 / 2500.0);
    }

    #[test]
    fn children_nest_and_are_disjoint() {
        let t = small_tree(3);
        for d in 2..=3 {
            let nodes = t.nodes(d);
            assert!(!nodes.is_empty() && nodes.len() <= 8usize.pow(d as u32 - 1));
            for w in nodes.windows(2) {
                if w[0].parent == w[1].parent {
                    assert!(w[0].hi.as_float() <= w[1].lo.as_float());
                }
            }
            for n in nodes {
                let p = &t.nodes(d - 1)[n.parent.unwrap()];
                assert!(p.lo.as_float() <= n.lo.as_float() && n.hi.as_float() <= p.hi.as_float());
                assert!(n.psi_len >= 1.0 / 2500.0);
            }
        }
    }

    #[test]
    fn survival_and_weights() {
        let t = small_tree(3);
        let n = f64::from(t.config.n);
        assert!(t.min_survival().unwrap() >= 1.0 - 4.0 / n);
        assert!(t.max_weight_ratio() <= 1.0 + 1e-12);
        // Retained children never carry more than their parent.
        for (i, p) in t.nodes(2).iter().enumerate() {
            let sum: f64 = t
                .nodes(3)
                .iter()
                .filter(|c| c.parent == Some(i))
                .map(|c| c.weight)
                .sum();
            assert!(sum <= p.weight * (1.0 + 1e-12));
        }
    }

    #[test]
    fn retained_intervals_avoid_the_window() {
        let t = small_tree(2);
        let rep = t.verify_avoidance(2, 48).unwrap();
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert_eq!(rep.points, 3 * t.nodes(2).len());
        assert!(rep.min_clearance > 0.0);
    }

    #[test]
    fn empty_arc_filters_only_by_length() {
        let mut c = choose_config(Real::zero(), Real::zero(), 0.2, 0.3, 4).unwrap();
        c.i_length = 0.0;
        c.margin = 0.0;
        let t = ComponentTree::seed(c, 48).unwrap();
        let v = &t.nodes(1)[0];
        // Nothing is removed, so V is the whole seed interval.
        assert_eq!(v.lo.as_float(), t.seed.0.as_float());
        assert_eq!(v.hi.as_float(), t.seed.1.as_float());
    }

    #[test]
    fn text_round_trip() {
        let t = small_tree(2);
        let back = ComponentTree::from_text(&t.to_text()).unwrap();
        assert_eq!(back.depth(), 2);
        assert_eq!(back.to_text(), t.to_text());
        let mut resumed = back;
        resumed.refine(64).unwrap();
        assert_eq!(resumed.depth(), 3);
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(ComponentTree::from_text("").is_err());
        assert!(ComponentTree::from_text("node 1 - 0x1p-1 0x1p0 1 1 - -").is_err());
        let t = small_tree(1).to_text();
        let broken = t.replace("node 1 -", "node 2 7");
        assert!(ComponentTree::from_text(&broken).is_err());
    }
}
