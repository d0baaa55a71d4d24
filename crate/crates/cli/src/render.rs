//! Static SVG figures of a line, its spiral and its `exp∘exp` image.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use expexp_core::density::sigma;
use expexp_core::precision::{required_bits_f64, Real};
use expexp_core::spiral::ObliqueLine;
use rug::Float;

pub const MAX_RESOLUTION: usize = 10_000;
const WIDTH_PX: f64 = 800.0;
const COLORS: [&str; 4] = ["#1f4e99", "#b03a2e", "#1e8449", "#7d3c98"];

#[derive(Debug)]
pub struct WindowEmpty;

impl std::fmt::Display for WindowEmpty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no curve point lies inside the window")
    }
}

impl std::error::Error for WindowEmpty {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Window {
    pub fn from_array(w: [f64; 4]) -> Self {
        Window {
            xmin: w[0],
            xmax: w[1],
            ymin: w[2],
            ymax: w[3],
        }
    }

    fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.xmin && p.0 <= self.xmax && p.1 >= self.ymin && p.1 <= self.ymax
    }

    /// Largest modulus of a window point.
    fn radius(&self) -> f64 {
        self.xmin
            .abs()
            .max(self.xmax.abs())
            .hypot(self.ymin.abs().max(self.ymax.abs()))
    }
}

/// One path; `None` breaks the polyline.
pub type Path = Vec<Option<(f64, f64)>>;

pub struct Figure {
    pub window: Window,
    pub paths: Vec<Path>,
    /// Straight guide segments (strip edges, axis pieces).
    pub guides: Vec<((f64, f64), (f64, f64))>,
}

fn times(t_min: f64, t_max: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (t_max - t_min) / (n - 1) as f64;
    (0..n).map(move |i| t_min + step * i as f64)
}

fn line_point(x: f64, y: f64, a: f64, t: f64) -> (f64, f64) {
    (x + a * t, y + t)
}

fn spiral_point(x: f64, y: f64, a: f64, t: f64) -> Option<(f64, f64)> {
    let lr = x + a * t;
    if lr > 700.0 {
        return None;
    }
    let r = lr.exp();
    Some((r * (y + t).cos(), r * (y + t).sin()))
}

/// `exp(Σ(t))`, or `None` when `|Re Σ(t)|` exceeds `bound`. `Σ` is taken at a
/// precision that keeps `Im Σ mod 2π` accurate, so large radii stay honest.
fn expexp_point(line: &ObliqueLine, t: f64, bound: f64) -> Option<(f64, f64)> {
    let lr = line.p_re().approx() + line.alpha().approx() * t;
    let cos = (line.p_im().approx() + t).cos();
    // A cosine far from zero already decides the clip without evaluating Σ.
    if lr > 1.0 && lr + cos.abs().ln() > bound.ln() + 1.0 {
        return None;
    }
    let prec = u32::try_from(required_bits_f64(lr, 53)).ok()?;
    let (re, im) = sigma(line, &Float::with_val(prec, t), prec);
    let re = re.to_f64();
    if !(re.abs() <= bound) {
        return None;
    }
    let (s, c) = im.sin_cos(Float::new(prec));
    let m = re.exp();
    Some((m * c.to_f64(), m * s.to_f64()))
}

fn bounding_box(paths: &[Path]) -> Option<Window> {
    let mut pts = paths.iter().flatten().flatten();
    let &(x0, y0) = pts.next()?;
    let mut w = Window {
        xmin: x0,
        xmax: x0,
        ymin: y0,
        ymax: y0,
    };
    for &(x, y) in pts {
        w.xmin = w.xmin.min(x);
        w.xmax = w.xmax.max(x);
        w.ymin = w.ymin.min(y);
        w.ymax = w.ymax.max(y);
    }
    let pad = 0.05 * (w.xmax - w.xmin).max(w.ymax - w.ymin).max(1e-9);
    Some(Window {
        xmin: w.xmin - pad,
        xmax: w.xmax + pad,
        ymin: w.ymin - pad,
        ymax: w.ymax + pad,
    })
}

pub struct RenderSpec<'a> {
    pub curve: &'a str,
    pub line: &'a ObliqueLine,
    pub window: Option<Window>,
    pub resolution: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub radius: f64,
    pub alpha0: f64,
    pub alpha1: f64,
}

/// Samples the requested curve. Curves: `line`, `spiral`, `expexp`, `fig2`
/// (the strip `|Re z| ≤ log R` with the spiral pieces inside it) and `fig3`
/// (spirals for `alpha0` and `alpha1` through `p = 0`, with the axis
/// intervals swept between them).
pub fn build(spec: &RenderSpec) -> Result<Figure> {
    let n = spec.resolution;
    if !(2..=MAX_RESOLUTION).contains(&n) {
        bail!("resolution {n} must lie in 2..={MAX_RESOLUTION}");
    }
    if !(spec.t_min < spec.t_max) || !spec.t_min.is_finite() || !spec.t_max.is_finite() {
        bail!("need finite t_min < t_max");
    }
    let x = spec.line.p_re().approx();
    let y = spec.line.p_im().approx();
    let a = spec.line.alpha().approx();
    let ts = || times(spec.t_min, spec.t_max, n);
    let mut guides = Vec::new();
    let (paths, default) = match spec.curve {
        "line" => (
            vec![ts().map(|t| Some(line_point(x, y, a, t))).collect::<Path>()],
            None,
        ),
        "spiral" => (vec![ts().map(|t| spiral_point(x, y, a, t)).collect()], None),
        "expexp" => {
            let w = spec.window.unwrap_or(Window {
                xmin: -4.0,
                xmax: 4.0,
                ymin: -4.0,
                ymax: 4.0,
            });
            let bound = w.radius().ln().abs().max(1e-9);
            (
                vec![ts().map(|t| expexp_point(spec.line, t, bound)).collect()],
                Some(w),
            )
        }
        "fig2" => {
            if !(spec.radius > 1.0) {
                bail!("fig2 needs radius > 1");
            }
            let h = spec.radius.ln();
            let path = ts()
                .map(|t| spiral_point(x, y, a, t).filter(|p| p.0.abs() <= h))
                .collect();
            let w = Window {
                xmin: -h - 1.0,
                xmax: h + 1.0,
                ymin: -4.0 * PI,
                ymax: 4.0 * PI,
            };
            let w = spec.window.unwrap_or(w);
            for e in [-h, h] {
                guides.push(((e, w.ymin), (e, w.ymax)));
            }
            (vec![path], Some(w))
        }
        "fig3" => {
            if !(spec.alpha0 < spec.alpha1) {
                bail!("fig3 needs alpha0 < alpha1");
            }
            let paths: Vec<Path> = [spec.alpha0, spec.alpha1]
                .iter()
                .map(|&al| ts().map(|t| spiral_point(0.0, 0.0, al, t)).collect())
                .collect();
            // ψ_k(J) for p = 0: the crossing at t_k = π(k + ½) sweeps
            // ±i·[e^{α0 t_k}, e^{α1 t_k}] on the imaginary axis.
            let k_lo = (spec.t_min / PI - 0.5).ceil() as i64;
            let k_hi = (spec.t_max / PI - 0.5).floor() as i64;
            for k in k_lo..=k_hi {
                let tk = PI * (k as f64 + 0.5);
                let s = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                guides.push((
                    (0.0, s * (spec.alpha0 * tk).exp()),
                    (0.0, s * (spec.alpha1 * tk).exp()),
                ));
            }
            (paths, None)
        }
        other => bail!("unknown curve {other:?} (line, spiral, expexp, fig2, fig3)"),
    };
    let window = match spec.window.or(default) {
        Some(w) => w,
        None => bounding_box(&paths).ok_or(WindowEmpty)?,
    };
    if !paths
        .iter()
        .flatten()
        .flatten()
        .any(|&p| window.contains(p))
    {
        return Err(WindowEmpty.into());
    }
    Ok(Figure {
        window,
        paths,
        guides,
    })
}

impl Figure {
    pub fn to_svg(&self) -> String {
        let w = self.window;
        let scale = WIDTH_PX / (w.xmax - w.xmin);
        let height = ((w.ymax - w.ymin) * scale).round().max(1.0);
        let px = |p: (f64, f64)| ((p.0 - w.xmin) * scale, (w.ymax - p.1) * scale);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH_PX:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH_PX:.0} {height:.0}\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        for &(a, b) in &self.guides {
            let (a, b) = (px(a), px(b));
            let _ = writeln!(
                s,
                "<line x1=\"{:.4}\" y1=\"{:.4}\" x2=\"{:.4}\" y2=\"{:.4}\" stroke=\"#888888\" stroke-width=\"1.5\"/>",
                a.0, a.1, b.0, b.1
            );
        }
        for (i, path) in self.paths.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            for run in runs(path, &w) {
                if run.len() < 2 {
                    continue;
                }
                let pts: Vec<String> = run
                    .iter()
                    .map(|&p| {
                        let (a, b) = px(p);
                        format!("{a:.4},{b:.4}")
                    })
                    .collect();
                let _ = writeln!(
                    s,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>",
                    pts.join(" ")
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Splits a path into runs of consecutive points inside the window.
fn runs(path: &Path, w: &Window) -> Vec<Vec<(f64, f64)>> {
    let mut out = vec![Vec::new()];
    for p in path {
        match p {
            Some(p) if w.contains(*p) => out.last_mut().expect("nonempty").push(*p),
            _ => {
                if !out.last().expect("nonempty").is_empty() {
                    out.push(Vec::new());
                }
            }
        }
    }
    out.retain(|r| !r.is_empty());
    out
}

/// Parses the three line parameters used by `render`.
pub fn parse_line(p_re: &str, p_im: &str, alpha: &str) -> Result<ObliqueLine> {
    Ok(ObliqueLine::new(
        Real::parse(p_re)?,
        Real::parse(p_im)?,
        Real::parse(alpha)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec<'a>(curve: &'a str, line: &'a ObliqueLine, window: Option<Window>) -> RenderSpec<'a> {
        RenderSpec {
            curve,
            line,
            window,
            resolution: 500,
            t_min: -10.0,
            t_max: 10.0,
            radius: 3.0,
            alpha0: 0.2,
            alpha1: 0.3,
        }
    }

    #[test]
    fn vertical_line_gives_unit_circle() {
        let line = parse_line("0", "0", "0").unwrap();
        let w = Window {
            xmin: -2.0,
            xmax: 2.0,
            ymin: -2.0,
            ymax: 2.0,
        };
        let fig = build(&spec("spiral", &line, Some(w))).unwrap();
        for p in fig.paths[0].iter().flatten() {
            assert!((p.0.hypot(p.1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn window_away_from_curve_is_empty() {
        let line = parse_line("0", "0", "0").unwrap();
        let w = Window {
            xmin: 5.0,
            xmax: 6.0,
            ymin: 5.0,
            ymax: 6.0,
        };
        let err = build(&spec("spiral", &line, Some(w))).err().unwrap();
        assert!(err.downcast_ref::<WindowEmpty>().is_some());
    }

    #[test]
    fn expexp_points_respect_the_clip() {
        let line = parse_line("0", "0", "0.1").unwrap();
        let fig = build(&spec("expexp", &line, None)).unwrap();
        let r = fig.window.radius();
        for p in fig.paths[0].iter().flatten() {
            let m = p.0.hypot(p.1);
            assert!(m <= r * (1.0 + 1e-9) && m >= (1.0 - 1e-9) / r);
        }
    }

    #[test]
    fn expexp_matches_double_precision_for_small_radii() {
        let line = parse_line("0.3", "0.2", "0.1").unwrap();
        let t = 1.7f64;
        let r = (0.3 + 0.1 * t).exp();
        let (sr, si) = (r * (0.2 + t).cos(), r * (0.2 + t).sin());
        let direct = (sr.exp() * si.cos(), sr.exp() * si.sin());
        let p = expexp_point(&line, t, 10.0).unwrap();
        assert!((p.0 - direct.0).abs() < 1e-12 && (p.1 - direct.1).abs() < 1e-12);
    }

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let line = parse_line("0", "0", "0.1").unwrap();
        let a = build(&spec("fig3", &line, None)).unwrap().to_svg();
        let b = build(&spec("fig3", &line, None)).unwrap().to_svg();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.matches("<polyline").count() >= 2);
    }

    #[test]
    fn resolution_is_bounded() {
        let line = parse_line("0", "0", "0.1").unwrap();
        let mut s = spec("line", &line, None);
        s.resolution = MAX_RESOLUTION + 1;
        assert!(build(&s).is_err());
    }
}
