//! Energy landscapes over the 3-tap blur simplex.
//!
//! A cell `(δ1, δ2)` on a grid of norm `a` stands for the taps `[δ2, a−δ1−δ2, δ1]`
//! (window order, see [`Blur3`]).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alternating::pam_k_step;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::{write_pnm, write_table_csv, PnmEncoding};
use crate::tv1d::{taut_string_denoise, Blur3};
use crate::usolve::tv_deconv_1d;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub delta1: f64,
    pub delta2: f64,
    /// `None` when the inner solve failed.
    pub energy: Option<f64>,
}

/// Triangular grid `{δ1, δ2 ≥ 0, δ1 + δ2 ≤ norm}` sampled at `resolution` points per side.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexGrid {
    pub resolution: usize,
    pub norm: f64,
    /// Row-major: `δ1` index outer, `δ2` index inner, feasible cells only.
    pub cells: Vec<GridCell>,
    /// Cells re-solved from a cold start to guard the warm-started sweep.
    pub rechecked: usize,
    /// Rechecks whose energy disagreed with the warm-started one by more than 1e-9 (relative).
    pub recheck_mismatches: usize,
}

pub const CSV_HEADER: [&str; 4] = ["delta1", "delta2", "norm", "energy"];

impl SimplexGrid {
    pub fn new(resolution: usize, norm: f64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!("grid resolution must be >= 2, got {resolution}")));
        }
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(format!("grid norm must be positive, got {norm}")));
        }
        let h = norm / (resolution - 1) as f64;
        let cells = (0..resolution)
            .flat_map(|i| (0..resolution - i).map(move |j| GridCell { delta1: i as f64 * h, delta2: j as f64 * h, energy: None }))
            .collect();
        Ok(Self { resolution, norm, cells, rechecked: 0, recheck_mismatches: 0 })
    }

    /// Grid spacing.
    pub fn spacing(&self) -> f64 {
        self.norm / (self.resolution - 1) as f64
    }

    /// Position of cell `(i, j)` in `cells`, if feasible.
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.resolution;
        (i < r && j < r - i).then(|| i * r - i * (i.saturating_sub(1)) / 2 + j)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&GridCell> {
        self.index(i, j).map(|p| &self.cells[p])
    }

    pub fn taps(&self, cell: &GridCell) -> [f64; 3] {
        [cell.delta2, (self.norm - cell.delta1 - cell.delta2).max(0.0), cell.delta1]
    }

    fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.resolution).flat_map(move |i| (0..self.resolution - i).map(move |j| (i, j)))
    }

    /// Grid indices of the smallest valid energy.
    pub fn argmin(&self) -> Option<(usize, usize)> {
        self.coords()
            .zip(&self.cells)
            .filter_map(|(ij, c)| c.energy.map(|e| (ij, e)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(ij, _)| ij)
    }

    pub fn min_energy(&self) -> Option<f64> {
        self.argmin().and_then(|(i, j)| self.get(i, j)?.energy)
    }

    /// Cells strictly below all valid feasible 8-neighbours.
    pub fn strict_local_minima(&self) -> Vec<(usize, usize)> {
        self.coords()
            .filter(|&(i, j)| {
                let Some(e) = self.get(i, j).and_then(|c| c.energy) else { return false };
                let mut any = false;
                for di in -1isize..=1 {
                    for dj in -1isize..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (ni, nj) = (i as isize + di, j as isize + dj);
                        if ni < 0 || nj < 0 {
                            continue;
                        }
                        if let Some(v) = self.get(ni as usize, nj as usize).and_then(|c| c.energy) {
                            any = true;
                            if v <= e {
                                return false;
                            }
                        }
                    }
                }
                any
            })
            .collect()
    }

    /// Rows `delta1,delta2,norm,energy`; failed cells are written as `nan`.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                vec![
                    c.delta1.to_string(),
                    c.delta2.to_string(),
                    self.norm.to_string(),
                    c.energy.map_or_else(|| "nan".to_string(), |e| e.to_string()),
                ]
            })
            .collect()
    }

    /// Min-max normalized energies on a `resolution × resolution` canvas (rows `δ1`,
    /// columns `δ2`); cells outside the simplex or failed are set to 1.
    pub fn heatmap(&self) -> Image {
        let vals: Vec<f64> = self.cells.iter().filter_map(|c| c.energy).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        Image::from_fn(self.resolution, self.resolution, |x, y| {
            self.get(y, x).and_then(|c| c.energy).map_or(1.0, |e| (e - lo) / span)
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_table_csv(path, &CSV_HEADER, self.csv_rows())
    }

    pub fn write_heatmap(&self, path: impl AsRef<Path>) -> Result<()> {
        write_pnm(path, &self.heatmap(), PnmEncoding::Binary)
    }
}

/// `min_u ½‖k∘u − f‖² + λJ(u)` for fixed taps, solved exactly.
pub fn min_u_energy(f: &[f64], taps: &[f64], lambda: f64) -> Result<f64> {
    Ok(tv_deconv_1d(f, taps, lambda, None)?.energy)
}

const RECHECK_FRACTION: f64 = 0.05;
const RECHECK_SEED: u64 = 0x5eed_1a4d;

/// Fills `grid` with `min_u` of the free-boundary energy at each blur. Rows are solved
/// in parallel, warm-starting each cell from its neighbour in the row; a seeded 5% of
/// cells are re-solved cold and the lower energy kept.
pub fn landscape_min_u(f: &[f64], lambda: f64, grid: SimplexGrid) -> Result<SimplexGrid> {
    if (grid.norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("min-u landscape needs a norm-1 grid, got {}", grid.norm)));
    }
    if f.is_empty() {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RECHECK_SEED);
    let recheck: Vec<bool> = (0..grid.cells.len()).map(|_| rng.random_bool(RECHECK_FRACTION)).collect();
    let rows: Vec<Vec<(Option<f64>, bool, bool)>> = (0..grid.resolution)
        .into_par_iter()
        .map(|i| {
            let mut warm: Option<Vec<f64>> = None;
            (0..grid.resolution - i)
                .map(|j| {
                    let p = grid.index(i, j).expect("feasible");
                    let taps = grid.taps(&grid.cells[p]);
                    let sol = tv_deconv_1d(f, &taps, lambda, warm.as_deref());
                    let mut e = sol.as_ref().ok().map(|s| s.energy);
                    warm = sol.ok().map(|s| s.jumps);
                    let mut mismatch = false;
                    if recheck[p] {
                        let cold = tv_deconv_1d(f, &taps, lambda, None).ok().map(|s| s.energy);
                        mismatch = match (e, cold) {
                            (Some(a), Some(b)) => (a - b).abs() > 1e-9 * a.abs().max(1.0),
                            (None, None) => false,
                            _ => true,
                        };
                        e = match (e, cold) {
                            (Some(a), Some(b)) => Some(a.min(b)),
                            (a, b) => a.or(b),
                        };
                    }
                    (e, recheck[p], mismatch)
                })
                .collect()
        })
        .collect();
    let mut out = grid;
    out.rechecked = 0;
    out.recheck_mismatches = 0;
    for (cell, (e, checked, mismatch)) in out.cells.iter_mut().zip(rows.into_iter().flatten()) {
        cell.energy = e;
        out.rechecked += checked as usize;
        out.recheck_mismatches += mismatch as usize;
    }
    Ok(out)
}

/// `‖k∘u¹ − f‖²` over blurs of each norm, with `u¹` the TV denoising of `f` extended by
/// one sample at each end.
pub fn landscape_fixed_u(f: &[f64], lambda: f64, norms: &[f64], resolution: usize) -> Result<Vec<SimplexGrid>> {
    if norms.is_empty() {
        return Err(Error::InvalidArgument("at least one norm is required".into()));
    }
    let u1 = taut_string_denoise(f, lambda)?;
    norms
        .iter()
        .map(|&a| {
            let mut g = SimplexGrid::new(resolution, a)?;
            for p in 0..g.cells.len() {
                let t = g.taps(&g.cells[p]);
                let cost = (0..f.len())
                    .map(|i| (t[0] * u1[i] + t[1] * u1[i + 1] + t[2] * u1[i + 2] - f[i]).powi(2))
                    .sum();
                g.cells[p].energy = Some(cost);
            }
            Ok(g)
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct PathOptions {
    /// Start the annealed λ here (decaying to the target λ); `None` uses the target throughout.
    pub lambda_start: Option<f64>,
    pub anneal_factor: f64,
    /// Stop once λ reached its target and the kernel moved less than this (max-abs).
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { lambda_start: None, anneal_factor: 0.99, tol: 1e-8, max_iters: 5000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub delta1: f64,
    pub delta2: f64,
    /// λ used by the macro-iteration that produced this point.
    pub lambda: f64,
}

/// PAM iterates (exact `u` step, least-squares `k` step, clamp and normalize) starting
/// from `start`. The first entry is the start itself.
pub fn pam_path_overlay(f: &[f64], lambda: f64, start: Blur3, opts: &PathOptions) -> Result<Vec<PathPoint>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let fi = Image::from_signal(f);
    let mut lam = opts.lambda_start.unwrap_or(lambda).max(lambda);
    let mut b = start;
    let mut path = vec![PathPoint { delta1: b.delta1, delta2: b.delta2, lambda: lam }];
    let mut warm: Option<Vec<f64>> = None;
    for _ in 0..opts.max_iters {
        let sol = tv_deconv_1d(f, &b.taps(), lam, warm.as_deref())?;
        let k = pam_k_step(&fi, &Image::from_signal(&sol.u))?;
        warm = Some(sol.jumps);
        let next = Blur3::from_kernel(&k)?;
        path.push(PathPoint { delta1: next.delta1, delta2: next.delta2, lambda: lam });
        let moved = (next.delta1 - b.delta1).abs().max((next.delta2 - b.delta2).abs());
        b = next;
        if lam == lambda && moved < opts.tol {
            return Ok(path);
        }
        lam = (lam * opts.anneal_factor).max(lambda);
    }
    Err(Error::NonConvergence { what: "pam path", iters: opts.max_iters, rel: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tv1d::{blur_step, tv_denoise, tv_energy, StepSignal};

    #[test]
    fn grid_layout() {
        let g = SimplexGrid::new(4, 1.0).unwrap();
        assert_eq!(g.cells.len(), 10);
        assert_eq!(g.index(0, 3), Some(3));
        assert_eq!(g.index(1, 0), Some(4));
        assert_eq!(g.index(3, 0), Some(9));
        assert_eq!(g.index(2, 2), None);
        for (p, c) in g.cells.iter().enumerate() {
            let (i, j) = ((c.delta1 * 3.0).round() as usize, (c.delta2 * 3.0).round() as usize);
            assert_eq!(g.index(i, j), Some(p));
            assert!(c.delta1 + c.delta2 <= 1.0 + 1e-12);
        }
        assert!(SimplexGrid::new(1, 1.0).is_err());
        assert!(SimplexGrid::new(3, 0.0).is_err());
    }

    #[test]
    fn local_minima_detection() {
        let mut g = SimplexGrid::new(3, 1.0).unwrap();
        for (c, e) in g.cells.iter_mut().zip([0.0, 1.0, 0.5, 2.0, 3.0, 0.2]) {
            c.energy = Some(e);
        }
        assert_eq!(g.strict_local_minima(), vec![(0, 0), (0, 2), (2, 0)]);
        assert_eq!(g.argmin(), Some((0, 0)));
    }

    #[test]
    fn corners_match_denoising() {
        let s = StepSignal::new(0.0, 1.0, 6, 6).unwrap();
        let f = blur_step(&s, &Blur3::new(0.3, 0.2).unwrap());
        let lambda = 0.2;
        let g = landscape_min_u(&f, lambda, SimplexGrid::new(6, 1.0).unwrap()).unwrap();
        let den = tv_energy(&tv_denoise(&f, lambda).unwrap(), &f, lambda);
        for (i, j) in [(0, 0), (5, 0), (0, 5)] {
            let e = g.get(i, j).unwrap().energy.unwrap();
            assert!((e - den).abs() < 1e-6, "{e} vs {den}");
        }
        assert!(g.cells.iter().all(|c| c.energy.unwrap() >= 0.0));
        assert_eq!(g.recheck_mismatches, 0);
    }

    #[test]
    fn sharp_step_minimum_at_corner() {
        let f = StepSignal::new(0.0, 1.0, 5, 5).unwrap().sharp();
        let g = landscape_min_u(&f[1..f.len() - 1], 0.1, SimplexGrid::new(11, 1.0).unwrap()).unwrap();
        let (i, j) = g.argmin().unwrap();
        assert!(matches!((i, j), (0, 0) | (10, 0) | (0, 10)), "{i} {j}");
    }

    #[test]
    fn fixed_u_without_regularization() {
        let s = StepSignal::new(-0.5, 0.5, 10, 10).unwrap();
        let f = blur_step(&s, &Blur3::new(0.3, 0.2).unwrap());
        let grids = landscape_fixed_u(&f, 0.0, &[1.0, 1.5], 21).unwrap();
        assert_eq!(grids[0].argmin(), Some((0, 0)));
        assert!(grids[0].min_energy().unwrap() < 1e-20);
        assert!(grids[1].min_energy().unwrap() > 0.0);
    }

    #[test]
    fn path_from_true_blur_stays() {
        let s = StepSignal::new(0.0, 0.2, 10, 10).unwrap().zero_mean();
        let b = Blur3::new(0.3, 0.4).unwrap();
        let f = blur_step(&s, &b);
        let p = pam_path_overlay(&f, 1e-4, b, &PathOptions::default()).unwrap();
        let last = p.last().unwrap();
        assert!((last.delta1 - 0.3).abs() < 0.02 && (last.delta2 - 0.4).abs() < 0.02, "{last:?}");
    }

    #[test]
    fn csv_and_heatmap_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let f = blur_step(&StepSignal::new(0.0, 1.0, 4, 4).unwrap(), &Blur3::new(0.2, 0.2).unwrap());
        let g = landscape_min_u(&f, 0.1, SimplexGrid::new(5, 1.0).unwrap()).unwrap();
        g.write_csv(dir.path().join("l.csv")).unwrap();
        g.write_heatmap(dir.path().join("l.pgm")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("l.csv")).unwrap();
        assert_eq!(text.lines().next(), Some("delta1,delta2,norm,energy"));
        assert_eq!(text.lines().count(), 16);
        let h = g.heatmap();
        assert!(h.min() >= 0.0 && h.max() <= 1.0);
    }
}
