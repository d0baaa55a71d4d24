use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::precision::Frac;
use crate::spiral::{frac_sequence, strip_segment, FracStream, ObliqueLine};

/// Cells of the annulus `1/R ≤ |z| ≤ R` in (log-radius, angle) coordinates.
///
/// Row `i` covers log-radii `[−log R + i·h, −log R + (i+1)·h)` with
/// `h = 2 log R / n_logr`; column `j` covers angles `[j, j+1)·2π/n_theta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnulusGrid {
    radius_bits: u64,
    n_logr: usize,
    n_theta: usize,
    cells: Vec<bool>,
}

impl AnnulusGrid {
    pub fn new(radius: f64, n_logr: usize, n_theta: usize) -> Result<Self> {
        if !(radius > 1.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!(
                "annulus radius {radius} must be finite and > 1"
            )));
        }
        if n_logr == 0 || n_theta == 0 {
            return Err(Error::InvalidInput(
                "grid dimensions must be positive".into(),
            ));
        }
        Ok(AnnulusGrid {
            radius_bits: radius.to_bits(),
            n_logr,
            n_theta,
            cells: vec![false; n_logr * n_theta],
        })
    }

    pub fn radius(&self) -> f64 {
        f64::from_bits(self.radius_bits)
    }

    pub fn log_bound(&self) -> f64 {
        self.radius().ln()
    }

    pub fn n_logr(&self) -> usize {
        self.n_logr
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn is_set(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n_theta + col]
    }

    pub fn set(&mut self, row: usize, col: usize) {
        self.cells[row * self.n_theta + col] = true;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn covered_fraction(&self) -> f64 {
        self.count() as f64 / self.cells.len() as f64
    }

    pub fn is_full(&self) -> bool {
        self.cells.iter().all(|&c| c)
    }

    /// Number of angular columns with at least one painted cell.
    pub fn columns_hit(&self) -> usize {
        (0..self.n_theta)
            .filter(|&j| (0..self.n_logr).any(|i| self.is_set(i, j)))
            .count()
    }

    /// Cell-wise union; grids must have the same shape.
    pub fn merge(&mut self, other: &AnnulusGrid) -> Result<()> {
        if self.n_logr != other.n_logr
            || self.n_theta != other.n_theta
            || self.radius_bits != other.radius_bits
        {
            return Err(Error::InvalidInput("grid shapes differ".into()));
        }
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a |= *b;
        }
        Ok(())
    }

    fn empty_like(&self) -> Self {
        AnnulusGrid {
            cells: vec![false; self.cells.len()],
            ..self.clone()
        }
    }

    /// Continuous grid coordinates of `(log r, angle)`; the angle is not wrapped.
    fn grid_coords(&self, log_r: f64, angle: f64) -> (f64, f64) {
        let l = self.log_bound();
        let top = self.n_logr as f64 * (1.0 - 1e-12);
        let x = ((log_r + l) / (2.0 * l) * self.n_logr as f64).clamp(0.0, top);
        (x, angle / TAU * self.n_theta as f64)
    }

    fn mark(&mut self, row: i64, col: i64) {
        if row < 0 || row >= self.n_logr as i64 {
            return;
        }
        let col = col.rem_euclid(self.n_theta as i64) as usize;
        self.set(row as usize, col);
    }

    /// Marks every cell crossed by the straight segment between two points
    /// given as `(log r, unwrapped angle)`.
    pub fn paint_segment(&mut self, a: (f64, f64), b: (f64, f64)) {
        let (x0, y0) = self.grid_coords(a.0, a.1);
        let (x1, y1) = self.grid_coords(b.0, b.1);
        let (mut cx, mut cy) = (x0.floor() as i64, y0.floor() as i64);
        let (ex, ey) = (x1.floor() as i64, y1.floor() as i64);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let step_x = if dx > 0.0 { 1 } else { -1 };
        let step_y = if dy > 0.0 { 1 } else { -1 };
        let boundary = |c: i64, step: i64| (c + i64::from(step > 0)) as f64;
        let mut t_max_x = if dx != 0.0 {
            (boundary(cx, step_x) - x0) / dx
        } else {
            f64::INFINITY
        };
        let mut t_max_y = if dy != 0.0 {
            (boundary(cy, step_y) - y0) / dy
        } else {
            f64::INFINITY
        };
        let t_dx = if dx != 0.0 {
            1.0 / dx.abs()
        } else {
            f64::INFINITY
        };
        let t_dy = if dy != 0.0 {
            1.0 / dy.abs()
        } else {
            f64::INFINITY
        };
        let max_steps = (ex - cx).abs() + (ey - cy).abs() + 2;
        self.mark(cx, cy);
        for _ in 0..max_steps {
            if cx == ex && cy == ey {
                break;
            }
            if t_max_x < t_max_y {
                cx += step_x;
                t_max_x += t_dx;
            } else {
                cy += step_y;
                t_max_y += t_dy;
            }
            self.mark(cx, cy);
        }
    }

    /// Portable bitmap (`P1`), one text row per log-radius band, outermost first.
    pub fn to_pbm(&self) -> String {
        let mut s = format!("P1\n{} {}\n", self.n_theta, self.n_logr);
        for i in (0..self.n_logr).rev() {
            let row: Vec<&str> = (0..self.n_theta)
                .map(|j| if self.is_set(i, j) { "1" } else { "0" })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// Polyline samples per crossing: enough to follow the component's
/// curvature at the grid's radial resolution.
fn samples_for(grid: &AnnulusGrid) -> usize {
    (4 * grid.n_logr).max(16)
}

/// Paints the image of the strip component through crossing `k` whose
/// residue is `frac`; returns `false` when the component does not cross the
/// whole strip (small radii).
pub fn paint_crossing(grid: &mut AnnulusGrid, line: &ObliqueLine, k: i64, frac: &Frac) -> bool {
    let seg = match strip_segment(line, k, grid.radius(), samples_for(grid)) {
        Ok(seg) => seg,
        Err(_) => return false,
    };
    let base = TAU * frac.value_f64();
    for w in seg.polyline.windows(2) {
        grid.paint_segment((w[0].0, base + w[0].1), (w[1].0, base + w[1].1));
    }
    true
}

/// Paints the images of the first `count` outward crossings.
///
/// Workers paint private grids that are merged by union at the end.
pub fn paint_coverage(
    line: &ObliqueLine,
    count: usize,
    grid: AnnulusGrid,
    guard_bits: u32,
) -> Result<AnnulusGrid> {
    let fracs = frac_sequence(line, count, guard_bits)?;
    let blank = grid.empty_like();
    let painted = fracs
        .par_iter()
        .enumerate()
        .fold(
            || blank.clone(),
            |mut g, (j, f)| {
                paint_crossing(&mut g, line, line.outward_index(j as u64), f);
                g
            },
        )
        .reduce(
            || blank.clone(),
            |mut a, b| {
                a.merge(&b).expect("same shape");
                a
            },
        );
    let mut out = grid;
    out.merge(&painted)?;
    Ok(out)
}

/// Paints crossings one by one until every cell is set or `k_max` outward
/// crossings have been used. Returns the grid and the number of crossings
/// after which it first became full.
pub fn paint_until_covered(
    line: &ObliqueLine,
    k_max: usize,
    mut grid: AnnulusGrid,
    guard_bits: u32,
) -> Result<(AnnulusGrid, Option<usize>)> {
    if grid.is_full() {
        return Ok((grid, Some(0)));
    }
    for (j, item) in FracStream::new(line, guard_bits)?.take(k_max).enumerate() {
        let (k, frac) = item?;
        if paint_crossing(&mut grid, line, k, &frac) && grid.is_full() {
            return Ok((grid, Some(j + 1)));
        }
    }
    Ok((grid, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Real;

    #[test]
    fn segment_traversal_is_connected() {
        let mut g = AnnulusGrid::new(std::f64::consts::E, 8, 8).unwrap();
        g.paint_segment((-1.0, 0.0), (1.0, TAU));
        // A diagonal across the whole grid touches every row and every column.
        assert!((0..8).all(|i| (0..8).any(|j| g.is_set(i, j))));
        assert_eq!(g.columns_hit(), 8);
    }

    #[test]
    fn painting_is_idempotent() {
        let line = ObliqueLine::from_f64(1.0, 0.0, 0.3).unwrap();
        let g = AnnulusGrid::new(std::f64::consts::E, 16, 16).unwrap();
        let once = paint_coverage(&line, 40, g, 32).unwrap();
        let twice = paint_coverage(&line, 40, once.clone(), 32).unwrap();
        assert_eq!(once, twice);
        assert!(once.covered_fraction() > 0.0 && once.covered_fraction() <= 1.0);
    }

    #[test]
    fn circle_paints_one_spoke() {
        // r = π: every crossing has residue 1/2.
        let line = ObliqueLine::new(Real::log_pi(), Real::half_pi(), Real::zero());
        let g = AnnulusGrid::new(std::f64::consts::E, 16, 64).unwrap();
        let few = paint_coverage(&line, 2, g.clone(), 32).unwrap();
        let many = paint_coverage(&line, 50, g, 32).unwrap();
        assert_eq!(few, many);
        // Even and odd crossings bend to opposite sides of the same angle π.
        assert!(few.columns_hit() <= 4, "{}", few.to_pbm());
        assert!((0..16).all(|i| (30..34).any(|j| few.is_set(i, j))));
    }

    #[test]
    fn pbm_layout() {
        let mut g = AnnulusGrid::new(2.0, 2, 3).unwrap();
        g.set(1, 2);
        assert_eq!(g.to_pbm(), "P1\n3 2\n0 0 1\n0 0 0\n");
    }
}
