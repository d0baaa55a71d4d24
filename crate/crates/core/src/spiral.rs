//! Lines `L_α(p) = {p + t(i + α)}`, their spirals `Σ(t) = exp(p + t(i + α))`
//! and the crossings of a spiral with the imaginary axis.
//!
//! Crossing `k` happens at `t_k = π/2 + kπ − Im p`, on the positive axis for
//! even `k` and the negative axis for odd `k`, at radius
//! `r_k = exp(Re p + α t_k)`. Its residue is `{±r_k / 2π}`.

use std::collections::VecDeque;

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{
    checked_precision, pi, reduce_exp, required_bits_f64, two_pi, BigReal, Frac, Real,
    MIN_GUARD_BITS,
};

/// The line `L_α(p)`, `p = p_re + i p_im`.
#[derive(Clone, Debug)]
pub struct ObliqueLine {
    p_re: Real,
    p_im: Real,
    alpha: Real,
}

impl ObliqueLine {
    pub fn new(p_re: Real, p_im: Real, alpha: Real) -> Self {
        ObliqueLine { p_re, p_im, alpha }
    }

    pub fn from_f64(p_re: f64, p_im: f64, alpha: f64) -> Result<Self> {
        for v in [p_re, p_im, alpha] {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "line parameter {v} is not finite"
                )));
            }
        }
        Ok(ObliqueLine::new(
            Real::from_f64(p_re),
            Real::from_f64(p_im),
            Real::from_f64(alpha),
        ))
    }

    /// Parses three decimal (or named-constant) strings.
    pub fn parse(p_re: &str, p_im: &str, alpha: &str) -> Result<Self> {
        Ok(ObliqueLine::new(
            Real::parse(p_re)?,
            Real::parse(p_im)?,
            Real::parse(alpha)?,
        ))
    }

    pub fn p_re(&self) -> &Real {
        &self.p_re
    }

    pub fn p_im(&self) -> &Real {
        &self.p_im
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn is_oblique(&self) -> bool {
        !self.alpha.is_zero()
    }

    /// `+1` when the spiral grows with `k` (α ≥ 0), `-1` otherwise.
    pub fn outward_direction(&self) -> i64 {
        if self.alpha.signum() < 0 {
            -1
        } else {
            1
        }
    }

    /// Crossing index of the `j`-th outward crossing.
    pub fn outward_index(&self, j: u64) -> i64 {
        self.outward_direction() * j as i64
    }

    /// The complex-conjugate line `L_{-α}(conj p)`.
    pub fn conjugate(&self) -> Self {
        ObliqueLine::new(self.p_re.clone(), self.p_im.neg(), self.alpha.neg())
    }

    /// `t_k` in double precision.
    pub fn t_f64(&self, k: i64) -> f64 {
        std::f64::consts::PI * (k as f64 + 0.5) - self.p_im.approx()
    }

    /// `log r_k` in double precision.
    pub fn log_radius_f64(&self, k: i64) -> f64 {
        self.p_re.approx() + self.alpha.approx() * self.t_f64(k)
    }

    /// `t_k` and `log r_k` at `prec` bits, with a bound on the absolute error
    /// of the computed `log r_k`.
    fn crossing_parts(&self, k: i64, prec: u32) -> (Float, Float, Float) {
        let x = self.p_re.eval(prec).into_float();
        let y = self.p_im.eval(prec).into_float();
        let a = self.alpha.eval(prec).into_float();
        let half_turns = Float::with_val(prec, pi(prec) * Float::with_val(64, 2 * k + 1)) >> 1u32;
        let t = Float::with_val(prec, &half_turns - &y);
        let u = Float::with_val(prec, &x + Float::with_val(prec, &a * &t));
        let mag = x.to_f64().abs()
            + a.to_f64().abs() * (half_turns.to_f64().abs() + y.to_f64().abs())
            + 1.0;
        let err = Float::with_val(64, 8.0 * mag) >> prec;
        (t, u, err)
    }

    /// `(t_k, log r_k)` at `prec` bits.
    pub fn crossing_time(&self, k: i64, prec: u32) -> (Float, Float) {
        let (t, u, _) = self.crossing_parts(k, prec);
        (t, u)
    }

    /// Extra working bits needed to absorb the input error of `log r_k`.
    fn input_bits(&self, k: i64) -> u64 {
        let mag = self.p_re.approx().abs()
            + self.alpha.approx().abs()
                * (std::f64::consts::PI * (k as f64 + 0.5).abs() + self.p_im.approx().abs())
            + 1.0;
        (16.0 * mag).log2().ceil().max(0.0) as u64 + 2
    }
}

/// One intersection of the spiral with the imaginary axis.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub k: i64,
    pub t_k: BigReal,
    pub log_radius: BigReal,
    /// `+1` on the positive imaginary half-axis, `-1` on the negative one.
    pub sign: i8,
    /// `{sign · r_k / 2π}`.
    pub frac: Frac,
}

fn sign_of(k: i64) -> i8 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn check_guard(guard_bits: u32) -> Result<()> {
    if guard_bits < MIN_GUARD_BITS {
        return Err(Error::InvalidInput(format!(
            "guard_bits {guard_bits} < {MIN_GUARD_BITS}"
        )));
    }
    Ok(())
}

/// Crossing `k` computed directly from the closed form.
pub fn crossing(line: &ObliqueLine, k: i64, guard_bits: u32) -> Result<Crossing> {
    check_guard(guard_bits)?;
    let bits = required_bits_f64(line.log_radius_f64(k), guard_bits) + line.input_bits(k);
    let prec = checked_precision(bits)?;
    let (t, u, err) = line.crossing_parts(k, prec);
    let frac = reduce_exp(&u, Some(&err), prec, guard_bits)?;
    let sign = sign_of(k);
    let frac = if sign < 0 { frac.negated() } else { frac };
    Ok(Crossing {
        k,
        t_k: BigReal::from_float(t),
        log_radius: BigReal::from_float(u),
        sign,
        frac,
    })
}

/// Crossings `k_min..=k_max`, evaluated independently (in parallel) and
/// returned in index order.
pub fn crossings(
    line: &ObliqueLine,
    k_min: i64,
    k_max: i64,
    guard_bits: u32,
) -> Result<Vec<Crossing>> {
    if k_min > k_max {
        return Err(Error::InvalidInput(format!(
            "k_min {k_min} > k_max {k_max}"
        )));
    }
    check_guard(guard_bits)?;
    (k_min..=k_max)
        .into_par_iter()
        .map(|k| crossing(line, k, guard_bits))
        .collect()
}

/// Number of crossings per block in [`FracStream`].
pub const STREAM_BLOCK: usize = 512;

/// Residues of successive outward crossings `k = 0, d, 2d, …` (`d` the
/// outward direction).
///
/// Within a block the quotient `r_k / 2π` is advanced by multiplying with
/// `exp(dαπ)`; each block restarts from a fresh `exp` at a precision that
/// covers the largest radius in the block plus the accumulated rounding.
pub struct FracStream {
    line: ObliqueLine,
    guard_bits: u32,
    block_size: usize,
    next_j: u64,
    pending: VecDeque<(i64, Frac)>,
}

impl FracStream {
    pub fn new(line: &ObliqueLine, guard_bits: u32) -> Result<Self> {
        check_guard(guard_bits)?;
        Ok(FracStream {
            line: line.clone(),
            guard_bits,
            block_size: STREAM_BLOCK,
            next_j: 0,
            pending: VecDeque::new(),
        })
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = block_size.max(1);
        self
    }

    fn refill(&mut self) -> Result<()> {
        let block = residue_block(&self.line, self.next_j, self.block_size, self.guard_bits)?;
        self.next_j += self.block_size as u64;
        self.pending.extend(block);
        Ok(())
    }
}

impl Iterator for FracStream {
    type Item = Result<(i64, Frac)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.pending.is_empty() {
            if let Err(e) = self.refill() {
                return Some(Err(e));
            }
        }
        self.pending.pop_front().map(Ok)
    }
}

/// Residues of outward crossings `j0 .. j0 + len`.
fn residue_block(
    line: &ObliqueLine,
    j0: u64,
    len: usize,
    guard_bits: u32,
) -> Result<Vec<(i64, Frac)>> {
    let dir = line.outward_direction();
    let k0 = line.outward_index(j0);
    let k_end = line.outward_index(j0 + len as u64 - 1);
    let u_max = line.log_radius_f64(k0).max(line.log_radius_f64(k_end)) + 1.0;
    let alpha_pi = (line.alpha().approx() * std::f64::consts::PI).abs();
    let step_factor = 4.0 * alpha_pi + 4.0;
    let spread = (len as f64 * step_factor + 64.0).log2().ceil() as u64;
    let bits =
        required_bits_f64(u_max, guard_bits) + line.input_bits(k0.abs().max(k_end.abs())) + spread;
    let prec = checked_precision(bits)?;

    let (_, u, u_err) = line.crossing_parts(k0, prec);
    let tp = two_pi(prec);
    let mut q = Float::with_val(prec, u.exp_ref());
    q /= &tp;
    let step = {
        let a = line.alpha().eval(prec).into_float();
        let e = Float::with_val(prec, &a * &pi(prec)) * dir;
        Float::with_val(prec, e.exp_ref())
    };

    let ulp = Float::with_val(64, Float::i_exp(1, -(prec as i32)));
    // exp, 2π and the division, plus exp(u ± δ) - exp(u) ≤ 2δ exp(u).
    let mut rel = Float::with_val(64, &ulp * 4u32) + Float::with_val(64, &u_err * 2u32);
    let step_rel = Float::with_val(64, &ulp * (step_factor * 1.01));
    let store_prec = guard_bits.saturating_add(32).max(64).min(prec);
    let store_ulp = Float::with_val(64, Float::i_exp(1, -(store_prec as i32)));

    let mut out = Vec::with_capacity(len);
    for j in 0..len {
        if j > 0 {
            q *= &step;
            rel += &step_rel;
        }
        let qexp = q.get_exp().unwrap_or(i32::MIN / 2);
        let mut bound = Float::with_val(64, &rel << qexp) * Float::with_val(64, 1.01);
        let f = Float::with_val(prec, q.fract_ref());
        let mut value = Float::with_val(store_prec, &f);
        if store_prec < prec {
            bound += &store_ulp;
        }
        if value >= 1u32 {
            value = Float::new(store_prec);
        }
        let frac = Frac::new(BigReal::from_float(value), BigReal::from_float(bound))?;
        let k = k0 + dir * j as i64;
        let frac = if sign_of(k) < 0 { frac.negated() } else { frac };
        out.push((k, frac));
    }
    Ok(out)
}

/// Residues of the first `count` outward crossings.
///
/// For α ≥ 0 these are crossings `0..count`; for α < 0 they are
/// `0, -1, -2, …` (the spiral grows as `k` decreases).
pub fn frac_sequence(line: &ObliqueLine, count: usize, guard_bits: u32) -> Result<Vec<Frac>> {
    if count == 0 {
        return Err(Error::InvalidInput("K must be at least 1".into()));
    }
    check_guard(guard_bits)?;
    let blocks: Vec<(u64, usize)> = (0..count)
        .step_by(STREAM_BLOCK)
        .map(|start| (start as u64, STREAM_BLOCK.min(count - start)))
        .collect();
    let parts: Vec<Vec<(i64, Frac)>> = blocks
        .into_par_iter()
        .map(|(j0, len)| residue_block(line, j0, len, guard_bits))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().map(|(_, f)| f).collect())
}

pub fn sinc(s: f64) -> f64 {
    if s.abs() < 1e-4 {
        1.0 - s * s / 6.0
    } else {
        s.sin() / s
    }
}

/// `(e^x - 1)/x`.
pub fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x / 2.0
    } else {
        x.exp_m1() / x
    }
}

/// The spiral near one crossing, in coordinates centred at the crossing.
///
/// With `s = t − t_k` and `u = r_k s`, the spiral point is
/// `w_k + (re(u), im(u))` where `w_k = sign · i r_k`. Both coordinates are
/// computed without forming `r_k`, so they stay accurate for any radius.
#[derive(Clone, Copy, Debug)]
pub struct LocalChart {
    pub sign: f64,
    pub alpha: f64,
    pub log_radius: f64,
    inv_radius: f64,
}

impl LocalChart {
    pub fn new(line: &ObliqueLine, k: i64) -> Self {
        LocalChart::from_parts(sign_of(k), line.alpha().approx(), line.log_radius_f64(k))
    }

    pub fn from_parts(sign: i8, alpha: f64, log_radius: f64) -> Self {
        LocalChart {
            sign: f64::from(sign),
            alpha,
            log_radius,
            inv_radius: (-log_radius).exp(),
        }
    }

    /// `s = u / r_k`.
    pub fn s(&self, u: f64) -> f64 {
        u * self.inv_radius
    }

    pub fn re(&self, u: f64) -> f64 {
        let s = self.s(u);
        -self.sign * u * (self.alpha * s).exp() * sinc(s)
    }

    /// `Im Σ − Im w_k`.
    pub fn d_im(&self, u: f64) -> f64 {
        let s = self.s(u);
        let h = sinc(s / 2.0);
        self.sign * u * (self.alpha * exprel(self.alpha * s) * s.cos() - (s / 2.0) * h * h)
    }

    pub fn point(&self, u: f64) -> (f64, f64) {
        (self.re(u), self.d_im(u))
    }

    /// Largest `|u|` within a half-turn of the crossing.
    fn half_turn(&self) -> f64 {
        if self.inv_radius == 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::PI / self.inv_radius
        }
    }

    /// First `u` in direction `dir` (±1) with `re(u) = target`, starting
    /// from the crossing; `None` if the component stays short of `target`
    /// for a whole half-turn.
    pub fn solve_re(&self, target: f64, dir: f64) -> Option<f64> {
        if target == 0.0 {
            return Some(0.0);
        }
        let reach = target.abs()
            * std::f64::consts::FRAC_PI_2
            * (self.alpha.abs() * std::f64::consts::FRAC_PI_2).exp();
        let limit = self.half_turn().min(reach * 1.01 + 1e-300);
        let f = |u: f64| self.re(u) - target;
        let steps = 512;
        let mut prev_u = 0.0;
        let mut prev_f = f(0.0);
        for i in 1..=steps {
            let u = dir * limit * f64::from(i) / f64::from(steps);
            let fu = f(u);
            if fu == 0.0 {
                return Some(u);
            }
            if fu.signum() != prev_f.signum() {
                return Some(bisect(&f, prev_u, u, prev_f));
            }
            prev_u = u;
            prev_f = fu;
        }
        None
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// The piece of the spiral through crossing `k` inside the strip
/// `|Re z| ≤ log R`, next to its linearization `Z_k`.
///
/// Coordinates are local: `(Re z, Im z − Im w_k)`.
#[derive(Clone, Debug)]
pub struct StripSegment {
    pub k: i64,
    pub radius: f64,
    pub sign: i8,
    pub alpha: f64,
    pub log_radius: f64,
    /// `Z_k ∩ H_R`: the segment of slope `−α` through `w_k`.
    pub z_endpoints: [(f64, f64); 2],
    /// `u = r_k (t − t_k)` at the two strip exits.
    pub u_range: (f64, f64),
    pub polyline: Vec<(f64, f64)>,
}

impl StripSegment {
    /// Slope of `Z_k`.
    pub fn slope(&self) -> f64 {
        -self.alpha
    }

    pub fn chart(&self) -> LocalChart {
        LocalChart::from_parts(self.sign, self.alpha, self.log_radius)
    }

    /// Hausdorff distance between the sampled component and `Z_k`.
    pub fn hausdorff_distance(&self) -> f64 {
        let [a, b] = self.z_endpoints;
        let to_segment = self
            .polyline
            .iter()
            .map(|&p| point_segment_distance(p, a, b))
            .fold(0.0, f64::max);
        let n = self.polyline.len().max(2) * 4;
        let to_polyline = (0..=n)
            .map(|i| {
                let w = i as f64 / n as f64;
                let q = (a.0 + w * (b.0 - a.0), a.1 + w * (b.1 - a.1));
                self.polyline
                    .windows(2)
                    .map(|seg| point_segment_distance(q, seg[0], seg[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        to_segment.max(to_polyline)
    }
}

pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let w = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + w * dx, a.1 + w * dy);
    (p.0 - qx).hypot(p.1 - qy)
}

/// Samples the component of the spiral through crossing `k` inside the strip
/// `|Re z| ≤ log R`, uniformly in `t` between its two exits.
pub fn strip_segment(
    line: &ObliqueLine,
    k: i64,
    radius: f64,
    samples: usize,
) -> Result<StripSegment> {
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!(
            "strip radius {radius} must be finite and > 1"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidInput("need at least 2 samples".into()));
    }
    let chart = LocalChart::new(line, k);
    let l = radius.ln();
    // re(u) ≈ −sign·u near the crossing, so the exit with re = sign·l lies at u < 0.
    let sgn = chart.sign;
    let u_lo = chart
        .solve_re(sgn * l, -1.0)
        .ok_or(Error::DegenerateStrip { k })?;
    let u_hi = chart
        .solve_re(-sgn * l, 1.0)
        .ok_or(Error::DegenerateStrip { k })?;
    if !(u_hi > u_lo) {
        return Err(Error::DegenerateStrip { k });
    }
    let polyline = (0..samples)
        .map(|i| {
            let u = u_lo + (u_hi - u_lo) * i as f64 / (samples - 1) as f64;
            chart.point(u)
        })
        .collect();
    let alpha = chart.alpha;
    Ok(StripSegment {
        k,
        radius,
        sign: sign_of(k),
        alpha,
        log_radius: chart.log_radius,
        z_endpoints: [(-l, alpha * l), (l, -alpha * l)],
        u_range: (u_lo, u_hi),
        polyline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_OVER_2PI: &str = "0.15915494309189533576888376337251436203445964574045644874";

    fn corrected_cor1_line(alpha: &str) -> ObliqueLine {
        ObliqueLine::new(
            Real::log_two_pi(),
            Real::half_pi(),
            Real::decimal(alpha).unwrap(),
        )
    }

    #[test]
    fn crossing_at_i() {
        let line = ObliqueLine::new(
            Real::zero(),
            Real::half_pi(),
            Real::decimal("0.37").unwrap(),
        );
        let c = crossing(&line, 0, 64).unwrap();
        assert!(c.t_k.is_zero() || c.t_k.abs().to_f64() < 1e-30);
        assert!(c.log_radius.abs().to_f64() < 1e-30);
        assert_eq!(c.sign, 1);
        let expected = BigReal::parse_decimal(ONE_OVER_2PI, 200).unwrap();
        assert!(c.frac.distance_to(&expected).to_f64() <= 2f64.powi(-64));
    }

    #[test]
    fn corrected_cor1_even_crossings() {
        // r_{2j} = 2π e^{0.2πj}, so the residue is {e^{0.2πj}}.
        let line = corrected_cor1_line("0.1");
        for j in [0i64, 1, 5, 40] {
            let c = crossing(&line, 2 * j, 48).unwrap();
            let prec = 400;
            let a = Float::with_val(prec, Float::parse("0.2").unwrap());
            let e = Float::with_val(prec, Float::with_val(prec, &a * pi(prec)) * j);
            let e = Float::with_val(prec, e.exp_ref());
            let expected = BigReal::from_float(Float::with_val(prec, e.fract_ref()));
            assert!(
                c.frac.distance_to(&expected).to_f64() <= 2f64.powi(-48),
                "j = {j}"
            );
        }
    }

    #[test]
    fn sign_alternates_and_turns_are_pi() {
        let line = ObliqueLine::from_f64(0.3, -1.2, 0.05).unwrap();
        let cs = crossings(&line, -5, 20, 32).unwrap();
        for w in cs.windows(2) {
            assert_eq!(i32::from(w[0].sign) * i32::from(w[1].sign), -1);
            let d = &w[1].t_k - &w[0].t_k;
            assert!((d.to_f64() - std::f64::consts::PI).abs() < 1e-15);
            assert!(w[1].log_radius > w[0].log_radius);
        }
    }

    #[test]
    fn alpha_zero_residues_alternate() {
        let line = ObliqueLine::new(Real::zero(), Real::half_pi(), Real::zero());
        let fr = frac_sequence(&line, 6, 40).unwrap();
        let base = 1.0 / (2.0 * std::f64::consts::PI);
        for (k, f) in fr.iter().enumerate() {
            let expected = if k % 2 == 0 { base } else { 1.0 - base };
            assert!((f.value_f64() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn stream_matches_direct_crossings() {
        let line = corrected_cor1_line("0.1");
        let stream: Vec<_> = FracStream::new(&line, 40)
            .unwrap()
            .with_block_size(7)
            .take(50)
            .collect::<Result<_>>()
            .unwrap();
        for (k, f) in stream {
            let c = crossing(&line, k, 40).unwrap();
            assert!(
                c.frac.distance_to(f.value()).to_f64() <= 2f64.powi(-39),
                "k = {k}"
            );
        }
    }

    #[test]
    fn negative_alpha_runs_downward() {
        let line = ObliqueLine::from_f64(0.0, 0.0, -0.2).unwrap();
        let seq = frac_sequence(&line, 10, 32).unwrap();
        for (j, f) in seq.iter().enumerate() {
            let c = crossing(&line, -(j as i64), 32).unwrap();
            assert!(c.frac.distance_to(f.value()).to_f64() <= 2f64.powi(-31));
        }
    }

    #[test]
    fn single_element_sequence() {
        let line = ObliqueLine::from_f64(0.7, 0.4, 0.3).unwrap();
        let seq = frac_sequence(&line, 1, 32).unwrap();
        let c = crossing(&line, 0, 32).unwrap();
        assert_eq!(seq[0].value(), c.frac.value());
    }

    #[test]
    fn local_chart_has_slope_minus_alpha() {
        let chart = LocalChart::from_parts(1, 0.3, 2.0);
        let h = 1e-6;
        let (x1, y1) = chart.point(h);
        let (x0, y0) = chart.point(-h);
        assert!(((y1 - y0) / (x1 - x0) + 0.3).abs() < 1e-6);
        let chart = LocalChart::from_parts(-1, 0.3, 2.0);
        let (x1, y1) = chart.point(h);
        let (x0, y0) = chart.point(-h);
        assert!(((y1 - y0) / (x1 - x0) + 0.3).abs() < 1e-6);
    }

    #[test]
    fn local_chart_matches_direct_evaluation() {
        let line = ObliqueLine::from_f64(0.2, 0.1, 0.15).unwrap();
        for k in [0i64, 1, 2, 3] {
            let chart = LocalChart::new(&line, k);
            let r = chart.log_radius.exp();
            for s in [-0.3, -0.05, 0.02, 0.4] {
                let t = line.t_f64(k) + s;
                let mag = (0.2 + 0.15 * t).exp();
                let (re, im) = (mag * (0.1 + t).cos(), mag * (0.1 + t).sin());
                let (lx, ly) = chart.point(r * s);
                assert!((lx - re).abs() < 1e-12);
                assert!((ly + chart.sign * r - im).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn strip_segment_geometry() {
        let line = ObliqueLine::from_f64(1.0, 0.0, 0.2).unwrap();
        let seg = strip_segment(&line, 4, std::f64::consts::E, 64).unwrap();
        assert_eq!(seg.slope(), -0.2);
        for &(x, _) in &seg.polyline {
            assert!(x.abs() <= 1.0 + 1e-12);
        }
        let [a, b] = seg.z_endpoints;
        assert!((a.1 + 0.2 * a.0).abs() < 1e-15 && (b.1 + 0.2 * b.0).abs() < 1e-15);
        let first = seg.polyline[0].0.abs();
        let last = seg.polyline[63].0.abs();
        assert!((first - 1.0).abs() < 1e-9 && (last - 1.0).abs() < 1e-9);
    }

    #[test]
    fn circle_arc_is_close_to_horizontal_segment() {
        // α = 0: Z_k is horizontal and Σ_k is a circular arc bulging by
        // r - sqrt(r² - L²) ≈ L²/2r.
        let line = ObliqueLine::from_f64(2.0, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let seg = strip_segment(&line, 0, std::f64::consts::E, 400).unwrap();
        let r = 2f64.exp();
        let bulge = r - (r * r - 1.0).sqrt();
        assert!((seg.hausdorff_distance() - bulge).abs() < 1e-4);
        assert_eq!(seg.slope(), 0.0);
    }

    #[test]
    fn small_circle_never_leaves_strip() {
        let line = ObliqueLine::from_f64(-1.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            strip_segment(&line, 0, 2.0, 10),
            Err(Error::DegenerateStrip { k: 0 })
        ));
    }

    #[test]
    fn ceiling_propagates() {
        let line = ObliqueLine::from_f64(1e7, 0.0, 0.1).unwrap();
        assert!(matches!(
            crossing(&line, 0, 32),
            Err(Error::PrecisionOverflow { .. })
        ));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn half_turn_spacing(x in -5.0f64..5.0, y in -10.0f64..10.0, a in -2.0f64..2.0, k in -1000i64..1000) {
            let line = ObliqueLine::from_f64(x, y, a).unwrap();
            let prec = 256;
            let (t0, _, _) = line.crossing_parts(k, prec);
            let (t1, _, _) = line.crossing_parts(k + 1, prec);
            let d = Float::with_val(prec, &t1 - &t0) - pi(prec);
            prop_assert!(d.to_f64().abs() < 1e-60);
        }

        #[test]
        fn guard_refinement(x in -2.0f64..2.0, y in -3.0f64..3.0, a in 0.01f64..1.5, k in 0i64..400, g in 16u32..64) {
            let line = ObliqueLine::from_f64(x, y, a).unwrap();
            let lo = crossing(&line, k, g).unwrap();
            let hi = crossing(&line, k, g + 32).unwrap();
            prop_assert!(lo.frac.distance_to(hi.frac.value()).to_f64() <= 2f64.powi(1 - g as i32));
        }
    }
}
