//! Alternating minimization in `u` and `k`: the constrained (AM) and the
//! projected (PAM) variants, plus executable checks of their behaviour on blurred steps.

mod kstep;
mod theorems;

pub use kstep::{am_k_step, am_k_step_traced, kernel_normal_equations, least_squares_kernel, pam_k_step, project_simplex, KStepTrace};
pub use theorems::{
    sample_instances, verify_theorem3, verify_theorem4, write_report_csv, StepInstance, Theorem3Report, Theorem4Report,
    VerificationRow,
};

use crate::error::{Error, Result};
use crate::image::{Image, Kernel};
use crate::usolve::{solve_smoothed, tv_deconv_1d, SmoothOptions};

/// Iteration limits shared by the inner solvers.
#[derive(Clone, Copy, Debug)]
pub struct IterOptions {
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for IterOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iters: 10_000 }
    }
}

/// State of a PAM run.
#[derive(Clone, Debug)]
pub struct PamState {
    pub u: Image,
    pub k: Kernel,
    pub lambda: f64,
    pub iteration: usize,
}

/// The `u` half-step: minimizes the free-boundary TV deconvolution energy for fixed `k`.
///
/// 1D inputs (a single row, one channel) are solved exactly; anything else uses the
/// smoothed solver and fails if it stalls above tolerance at the iteration cap.
pub fn am_u_step(f: &Image, k: &Kernel, lambda: f64) -> Result<Image> {
    if f.height() == 1 && k.height() == 1 && f.channels() == 1 {
        let sol = tv_deconv_1d(f.data(), k.data(), lambda, None)?;
        return Ok(Image::from_signal(&sol.u));
    }
    let opts = SmoothOptions::default();
    let sol = solve_smoothed(f, k, lambda, None, &opts)?;
    if !sol.converged {
        let rel = match sol.energy_trace.as_slice() {
            [.., a, b] => (a - b) / b.abs().max(1e-300),
            _ => f64::NAN,
        };
        return Err(Error::NonConvergence { what: "u step", iters: sol.iterations, rel });
    }
    Ok(sol.u)
}

impl PamState {
    /// The no-blur starting pair `(pad(f), δ)`.
    pub fn no_blur(f: &Image, kw: usize, kh: usize, lambda: f64) -> Result<Self> {
        let u = crate::usolve::initial_latent(f, kw, kh, crate::BoundaryMode::ValidFree)?;
        Ok(Self { u, k: Kernel::delta(kw, kh)?, lambda, iteration: 0 })
    }

    /// One macro-iteration with exact inner solves: `u` step, unconstrained `k` step,
    /// clamp, normalize.
    pub fn step(&mut self, f: &Image) -> Result<()> {
        self.u = am_u_step(f, &self.k, self.lambda)?;
        self.k = pam_k_step(f, &self.u)?;
        self.iteration += 1;
        Ok(())
    }
}
