use crate::diff::ColorMode;
use crate::error::{Error, Result};
use crate::image::BoundaryMode;

/// How the raw step sizes `eps_u`, `eps_k` become actual steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// `u ← u − eps_u·max|u|/max|∇_u E|·∇_u E`, and likewise for `k` with `max k`.
    /// Scale-free; the default.
    Normalized,
    /// `u ← u − eps_u·∇_u E`, halving `eps_u` (for the rest of the level) whenever the
    /// energy rises.
    FixedBacktracking,
}

#[derive(Clone, Debug)]
pub struct DeblurConfig {
    pub kernel_width: usize,
    pub kernel_height: usize,
    pub lambda_init: f64,
    pub lambda_min: f64,
    pub anneal_factor: f64,
    pub eps_u: f64,
    pub eps_k: f64,
    pub max_iters_per_level: usize,
    pub pyramid_factor: f64,
    /// Use at most this many pyramid levels (finest ones kept).
    pub max_levels: Option<usize>,
    pub tv_epsilon: f64,
    pub color: ColorMode,
    pub boundary: BoundaryMode,
    /// Estimate `k` from image gradients instead of intensities.
    pub filtered_kernel_estimation: bool,
    /// Restart λ at `lambda_init` on every pyramid level.
    pub anneal_restart_per_level: bool,
    pub step_rule: StepRule,
}

impl Default for DeblurConfig {
    fn default() -> Self {
        Self {
            kernel_width: 5,
            kernel_height: 5,
            lambda_init: 3e-2,
            lambda_min: 6e-4,
            anneal_factor: 0.99,
            eps_u: 5e-3,
            eps_k: 1e-2,
            max_iters_per_level: 2000,
            pyramid_factor: std::f64::consts::FRAC_1_SQRT_2,
            max_levels: None,
            tv_epsilon: 1e-4,
            color: ColorMode::Grayscale,
            boundary: BoundaryMode::ValidFree,
            filtered_kernel_estimation: false,
            anneal_restart_per_level: true,
            step_rule: StepRule::Normalized,
        }
    }
}

impl DeblurConfig {
    pub fn with_kernel_size(mut self, width: usize, height: usize) -> Self {
        self.kernel_width = width;
        self.kernel_height = height;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.kernel_width < 3 || self.kernel_height < 3 || self.kernel_width.is_multiple_of(2) || self.kernel_height.is_multiple_of(2) {
            return bad(format!("kernel size {}x{} must be odd and at least 3", self.kernel_width, self.kernel_height));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min <= self.lambda_init && self.lambda_init.is_finite()) {
            return bad(format!("need 0 < lambda_min <= lambda_init, got {} and {}", self.lambda_min, self.lambda_init));
        }
        if !(self.anneal_factor > 0.0 && self.anneal_factor < 1.0) {
            return bad(format!("anneal factor must lie in (0, 1), got {}", self.anneal_factor));
        }
        if !(self.pyramid_factor > 0.0 && self.pyramid_factor < 1.0) {
            return bad(format!("pyramid factor must lie in (0, 1), got {}", self.pyramid_factor));
        }
        if !(self.eps_u > 0.0 && self.eps_k > 0.0 && self.tv_epsilon > 0.0) {
            return bad("step sizes and tv_epsilon must be positive".into());
        }
        if self.max_iters_per_level == 0 || self.max_levels == Some(0) {
            return bad("iteration and level counts must be positive".into());
        }
        Ok(())
    }
}
