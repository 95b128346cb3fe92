use crate::diff::ColorMode;
use crate::error::Result;
use crate::image::{BoundaryMode, Image, Kernel};
use crate::usolve::{solve_smoothed, SmoothOptions, USolution};

/// Regularization weight used for evaluation.
pub const DEFAULT_NONBLIND_LAMBDA: f64 = 0.0068;

#[derive(Clone, Copy, Debug)]
pub struct NonblindOptions {
    pub tv_epsilon: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub color: ColorMode,
    pub boundary: BoundaryMode,
}

impl Default for NonblindOptions {
    fn default() -> Self {
        Self { tv_epsilon: 1e-3, max_iters: 1000, rel_tol: 1e-10, color: ColorMode::Grayscale, boundary: BoundaryMode::ValidFree }
    }
}

/// TV deconvolution with a known kernel; returns the latent image (larger than `f` by
/// the kernel support under the free boundary).
pub fn deblur_nonblind(f: &Image, k: &Kernel, lambda: f64) -> Result<Image> {
    Ok(deblur_nonblind_with(f, k, lambda, &NonblindOptions::default())?.u)
}

/// As [`deblur_nonblind`], also reporting iterations and whether the tolerance was met.
pub fn deblur_nonblind_with(f: &Image, k: &Kernel, lambda: f64, opts: &NonblindOptions) -> Result<USolution> {
    let so = SmoothOptions {
        tv_epsilon: opts.tv_epsilon,
        max_iters: opts.max_iters,
        rel_tol: opts.rel_tol,
        color: opts.color,
        boundary: opts.boundary,
    };
    solve_smoothed(f, k, lambda, None, &so)
}
