//! Minimizers of `½‖A_k u − f‖² + λ·TV(u)` for a fixed kernel.
//!
//! [`tv_deconv_1d`] solves the 1D free-boundary problem exactly by writing `u` as a
//! constant plus a sum of unit steps, which turns it into a lasso over the jump sizes.
//! [`solve_smoothed`] handles images of any shape with a smoothed TV term.

use nalgebra::{DMatrix, DVector};

use crate::conv::{blur_adjoint, blur_forward, latent_size};
use crate::diff::{smoothed_tv, smoothed_tv_gradient, ColorMode};
use crate::error::{Error, Result};
use crate::image::{BoundaryMode, Image, Kernel};

/// Exact 1D solution.
#[derive(Clone, Debug)]
pub struct Exact1d {
    /// Minimizer on the latent domain (length `f.len() + taps.len() − 1`).
    pub u: Vec<f64>,
    /// `½‖valid(u, k) − f‖² + λ Σ|u[i+1] − u[i]|`
    pub energy: f64,
    /// Jump sizes `u[j] − u[j−1]`, for warm starts.
    pub jumps: Vec<f64>,
    pub sweeps: usize,
    /// Energy after each coordinate-descent sweep (non-increasing).
    pub energy_trace: Vec<f64>,
}

/// `½‖valid(u, k) − f‖² + λ Σ|u[i+1] − u[i]|` for 1D signals.
pub fn energy_1d(u: &[f64], f: &[f64], taps: &[f64], lambda: f64) -> f64 {
    let m = taps.len();
    let data: f64 = (0..f.len())
        .map(|i| {
            let v: f64 = taps.iter().zip(&u[i..i + m]).map(|(k, x)| k * x).sum();
            0.5 * (v - f[i]).powi(2)
        })
        .sum();
    let tv: f64 = u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    data + lambda * tv
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

struct Lasso {
    g: DMatrix<f64>,
    b: DVector<f64>,
    lambda: f64,
}

impl Lasso {
    fn grad(&self, d: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.g * d
    }

    fn sweep(&self, d: &mut DVector<f64>, grad: &mut DVector<f64>) -> f64 {
        let p = d.len();
        let mut max_step: f64 = 0.0;
        for j in 0..p {
            let gjj = self.g[(j, j)];
            let new = if gjj > 0.0 { soft(grad[j] + gjj * d[j], self.lambda) / gjj } else { 0.0 };
            let delta = new - d[j];
            if delta != 0.0 {
                d[j] = new;
                grad.axpy(-delta, &self.g.column(j), 1.0);
                max_step = max_step.max(delta.abs() * gjj.sqrt());
            }
        }
        max_step
    }

    fn kkt_violation(&self, d: &DVector<f64>) -> f64 {
        let grad = self.grad(d);
        (0..d.len())
            .map(|j| {
                if self.g[(j, j)] == 0.0 {
                    0.0
                } else if d[j] != 0.0 {
                    (grad[j] - self.lambda * d[j].signum()).abs()
                } else {
                    (grad[j].abs() - self.lambda).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Solves the stationarity equations on the current support with signs held fixed.
    fn polish(&self, d: &DVector<f64>) -> Option<DVector<f64>> {
        let support: Vec<usize> = (0..d.len()).filter(|&j| d[j] != 0.0 && self.g[(j, j)] > 0.0).collect();
        let mut out = DVector::zeros(d.len());
        if support.is_empty() {
            return Some(out);
        }
        let s = support.len();
        let gs = DMatrix::from_fn(s, s, |a, c| self.g[(support[a], support[c])]);
        let rhs = DVector::from_fn(s, |a, _| self.b[support[a]] - self.lambda * d[support[a]].signum());
        let beta = gs.cholesky()?.solve(&rhs);
        for (a, &j) in support.iter().enumerate() {
            if beta[a].signum() != d[j].signum() || beta[a] == 0.0 {
                return None;
            }
            out[j] = beta[a];
        }
        Some(out)
    }
}

/// Exact minimizer of the 1D free-boundary TV deconvolution energy for a fixed kernel.
///
/// `taps` are in window orientation; `warm` optionally seeds the jump sizes.
pub fn tv_deconv_1d(f: &[f64], taps: &[f64], lambda: f64, warm: Option<&[f64]>) -> Result<Exact1d> {
    if f.is_empty() || taps.is_empty() {
        return Err(Error::InvalidArgument("empty signal or kernel".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let n = f.len();
    let m = taps.len();
    let big_m = n + m - 1;
    let p = big_m - 1;

    // tail[q] = Σ_{r ≥ q} k[r]
    let mut tail = vec![0.0; m + 1];
    for q in (0..m).rev() {
        tail[q] = tail[q + 1] + taps[q];
    }
    let total = tail[0];
    let t = |q: isize| -> f64 {
        if q <= 0 {
            total
        } else if q as usize >= m {
            0.0
        } else {
            tail[q as usize]
        }
    };
    let has_intercept = total.abs() > 1e-14;
    let mut x = DMatrix::from_fn(n, p, |i, c| t(c as isize + 1 - i as isize));
    let fmean = f.iter().sum::<f64>() / n as f64;
    let mut fc = DVector::from_iterator(n, f.iter().copied());
    let mut col_means = vec![0.0; p];
    if has_intercept {
        for c in 0..p {
            let mean = x.column(c).mean();
            col_means[c] = mean;
            x.column_mut(c).add_scalar_mut(-mean);
        }
        fc.add_scalar_mut(-fmean);
    }
    let lasso = Lasso { g: x.transpose() * &x, b: x.transpose() * &fc, lambda };

    let mut d = match warm {
        Some(w) if w.len() == p => DVector::from_column_slice(w),
        _ => DVector::zeros(p),
    };
    let mut grad = lasso.grad(&d);
    let scale = lasso.b.amax().max(lambda).max(1e-300);
    let fc_sq = fc.norm_squared();
    let centered_energy = |d: &DVector<f64>, grad: &DVector<f64>| {
        0.5 * fc_sq - 0.5 * d.dot(&(&lasso.b + grad)) + lambda * d.iter().map(|v| v.abs()).sum::<f64>()
    };

    let mut trace = Vec::new();
    let mut sweeps = 0usize;
    let mut solved = None;
    const ROUND: usize = 500;
    const MAX_SWEEPS: usize = 200_000;
    while sweeps < MAX_SWEEPS {
        let mut step = f64::INFINITY;
        for _ in 0..ROUND {
            step = lasso.sweep(&mut d, &mut grad);
            sweeps += 1;
            trace.push(centered_energy(&d, &grad));
            if step <= 1e-13 * scale {
                break;
            }
        }
        if let Some(pd) = lasso.polish(&d) {
            if lasso.kkt_violation(&pd) <= 1e-9 * scale {
                solved = Some(pd);
                break;
            }
        }
        if step <= 1e-15 * scale && lasso.kkt_violation(&d) <= 1e-9 * scale {
            solved = Some(d.clone());
            break;
        }
    }
    let d = solved.ok_or(Error::NonConvergence { what: "1D TV deconvolution", iters: sweeps, rel: lasso.kkt_violation(&d) / scale })?;

    let c = if has_intercept {
        (fmean - col_means.iter().zip(d.iter()).map(|(a, b)| a * b).sum::<f64>()) / total
    } else {
        0.0
    };
    let mut u = Vec::with_capacity(big_m);
    let mut acc = c;
    u.push(acc);
    for j in 0..p {
        acc += d[j];
        u.push(acc);
    }
    let energy = energy_1d(&u, f, taps, lambda);
    Ok(Exact1d { u, energy, jumps: d.iter().copied().collect(), sweeps, energy_trace: trace })
}

/// Options for [`solve_smoothed`].
#[derive(Clone, Copy, Debug)]
pub struct SmoothOptions {
    pub tv_epsilon: f64,
    pub max_iters: usize,
    /// Stop when the relative energy change of an accepted step falls below this.
    pub rel_tol: f64,
    pub color: ColorMode,
    pub boundary: BoundaryMode,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        Self {
            tv_epsilon: 1e-3,
            max_iters: 10_000,
            rel_tol: 1e-10,
            color: ColorMode::Grayscale,
            boundary: BoundaryMode::ValidFree,
        }
    }
}

#[derive(Clone, Debug)]
pub struct USolution {
    pub u: Image,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy of every accepted iterate (non-increasing).
    pub energy_trace: Vec<f64>,
}

/// `½‖A_k u − f‖² + λ·TV_ε(u)`
pub fn smoothed_energy(u: &Image, f: &Image, k: &Kernel, lambda: f64, opts: &SmoothOptions) -> Result<f64> {
    let r = blur_forward(u, k, opts.boundary)?.sub(f);
    Ok(0.5 * r.sq_norm() + lambda * smoothed_tv(u, opts.tv_epsilon, opts.color))
}

/// Gradient of [`smoothed_energy`] in `u`.
pub fn smoothed_gradient(u: &Image, f: &Image, k: &Kernel, lambda: f64, opts: &SmoothOptions) -> Result<Image> {
    let r = blur_forward(u, k, opts.boundary)?.sub(f);
    let mut g = blur_adjoint(&r, k, opts.boundary)?;
    if lambda != 0.0 {
        g.axpy(lambda, &smoothed_tv_gradient(u, opts.tv_epsilon, opts.color));
    }
    Ok(g)
}

/// Replicate-pads `f` to the latent size for the given kernel and boundary rule.
pub fn initial_latent(f: &Image, kw: usize, kh: usize, mode: BoundaryMode) -> Result<Image> {
    match mode {
        BoundaryMode::ValidFree => f.pad(kw / 2, kh / 2, BoundaryMode::Replicate),
        _ => Ok(f.clone()),
    }
}

/// Accelerated gradient descent on the smoothed energy, restarting momentum whenever a
/// step would raise the energy; accepted iterates therefore never increase it.
pub fn solve_smoothed(f: &Image, k: &Kernel, lambda: f64, init: Option<Image>, opts: &SmoothOptions) -> Result<USolution> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let (lw, lh) = latent_size(f.width(), f.height(), k.width(), k.height(), opts.boundary);
    let mut u = match init {
        Some(u) => {
            if u.width() != lw || u.height() != lh || u.channels() != f.channels() {
                return Err(Error::Dimension("initial latent image has the wrong size".into()));
            }
            u
        }
        None => initial_latent(f, k.width(), k.height(), opts.boundary)?,
    };
    let lip = k.l1().powi(2) + 8.0 * lambda / opts.tv_epsilon;
    let step = 1.0 / lip.max(1e-300);
    let mut e = smoothed_energy(&u, f, k, lambda, opts)?;
    let mut trace = vec![e];
    let mut y = u.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.max_iters {
        iterations = it + 1;
        let g = smoothed_gradient(&y, f, k, lambda, opts)?;
        let mut un = y.clone();
        un.axpy(-step, &g);
        let en = smoothed_energy(&un, f, k, lambda, opts)?;
        if !en.is_finite() {
            return Err(Error::Divergence { level: 0, iter: it });
        }
        if en > e {
            if t == 1.0 {
                // plain gradient step from an accepted point failed to descend: at optimum
                converged = true;
                break;
            }
            y = u.clone();
            t = 1.0;
            continue;
        }
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut yn = un.clone();
        yn.axpy((t - 1.0) / tn, &un.sub(&u));
        let rel = (e - en) / e.abs().max(1e-300);
        u = un;
        y = yn;
        t = tn;
        e = en;
        trace.push(e);
        if rel < opts.rel_tol {
            converged = true;
            break;
        }
    }
    Ok(USolution { u, energy: e, iterations, converged, energy_trace: trace })
}
