use nalgebra::{DMatrix, DVector};

use super::IterOptions;
use crate::conv::{convolve_valid, kernel_correlation};
use crate::deblur::project_kernel;
use crate::error::{Error, Result};
use crate::image::{Image, Kernel};

/// Euclidean projection onto `{k ≥ 0, Σk = 1}` by sorting.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn kernel_dims(f: &Image, u: &Image) -> Result<(usize, usize)> {
    if u.width() < f.width() || u.height() < f.height() || u.channels() != f.channels() {
        return Err(Error::Dimension("latent image must be at least as large as the observation".into()));
    }
    let kw = u.width() - f.width() + 1;
    let kh = u.height() - f.height() + 1;
    if kw.is_multiple_of(2) || kh.is_multiple_of(2) {
        return Err(Error::Dimension(format!("implied kernel {kw}x{kh} is not odd")));
    }
    Ok((kw, kh))
}

/// Gram matrix `AᵀA` and right-hand side `Aᵀf` of the quadratic `½‖valid(u, k) − f‖²` in `k`.
pub fn kernel_normal_equations(f: &Image, u: &Image) -> Result<(DMatrix<f64>, DVector<f64>, usize, usize)> {
    let (kw, kh) = kernel_dims(f, u)?;
    let n = kw * kh;
    let b = kernel_correlation(u, f)?;
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = convolve_valid(u, &Kernel::from_raw(kw, kh, e))?;
        let gc = kernel_correlation(u, &col)?;
        for i in 0..n {
            g[(i, j)] = gc.data()[i];
        }
    }
    // symmetrize away rounding
    let g = (&g + g.transpose()) * 0.5;
    Ok((g, DVector::from_column_slice(b.data()), kw, kh))
}

/// Unconstrained minimizer of `½‖valid(u, k) − f‖²` (minimum-norm if not unique).
pub fn least_squares_kernel(f: &Image, u: &Image) -> Result<Kernel> {
    let (g, b, kw, kh) = kernel_normal_equations(f, u)?;
    let smax = g.amax();
    let svd = g.svd(true, true);
    let k = svd
        .solve(&b, 1e-13 * smax.max(1e-300))
        .map_err(|e| Error::InvalidArgument(format!("normal equations: {e}")))?;
    Kernel::new(kw, kh, k.iter().copied().collect())
}

/// PAM `k` step: unconstrained least squares, then clamp negatives, then L1-normalize.
pub fn pam_k_step(f: &Image, u: &Image) -> Result<Kernel> {
    project_kernel(&least_squares_kernel(f, u)?)
}

/// Iterates of a constrained `k` step.
#[derive(Clone, Debug)]
pub struct KStepTrace {
    pub kernel: Kernel,
    /// Every iterate, starting from the delta initialization.
    pub iterates: Vec<Kernel>,
    pub energies: Vec<f64>,
    pub converged: bool,
}

/// AM `k` step: projected gradient descent over the probability simplex, started at the
/// delta kernel. Every iterate is feasible.
pub fn am_k_step(f: &Image, u: &Image) -> Result<Kernel> {
    let t = am_k_step_traced(f, u, &IterOptions::default(), false)?;
    if !t.converged {
        return Err(Error::NonConvergence { what: "simplex k step", iters: t.energies.len(), rel: f64::NAN });
    }
    Ok(t.kernel)
}

pub fn am_k_step_traced(f: &Image, u: &Image, opts: &IterOptions, record: bool) -> Result<KStepTrace> {
    let (g, b, kw, kh) = kernel_normal_equations(f, u)?;
    let f_sq = f.sq_norm();
    let energy = |k: &DVector<f64>| 0.5 * k.dot(&(&g * k)) - b.dot(k) + 0.5 * f_sq;
    let lip = g.clone().symmetric_eigenvalues().max();
    let mut k = DVector::from_column_slice(Kernel::delta(kw, kh)?.data());
    let mut e = energy(&k);
    let mut energies = vec![e];
    let mut iterates = Vec::new();
    let to_kernel = |k: &DVector<f64>| Kernel::from_raw(kw, kh, k.iter().copied().collect());
    if record {
        iterates.push(to_kernel(&k));
    }
    if lip <= 0.0 {
        return Ok(KStepTrace { kernel: to_kernel(&k), iterates, energies, converged: true });
    }
    let step = 1.0 / lip;
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let grad = &g * &k - &b;
        let kn = DVector::from_vec(project_simplex((&k - grad * step).as_slice()));
        let moved = (&kn - &k).amax();
        let en = energy(&kn);
        k = kn;
        if record {
            iterates.push(to_kernel(&k));
        }
        energies.push(en);
        let rel = (e - en).abs() / e.abs().max(1e-300);
        e = en;
        if moved == 0.0 || rel < opts.rel_tol {
            converged = true;
            break;
        }
    }
    Ok(KStepTrace { kernel: to_kernel(&k), iterates, energies, converged })
}
