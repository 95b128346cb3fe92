use super::pyramid::{build_pyramid, resize_bilinear, resize_kernel};
use super::steps::{k_gradient, model_energy, project_kernel, u_gradient, GradientModel};
use super::{DeblurConfig, StepRule};
use crate::error::{Error, Result};
use crate::image::{Image, Kernel};
use crate::usolve::initial_latent;

/// One line of the per-iteration energy log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord {
    pub level: usize,
    pub iteration: usize,
    pub lambda: f64,
    /// Smoothed energy after the `u` step, before the `k` update.
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct BlindResult {
    pub u: Image,
    pub k: Kernel,
    pub energy_log: Vec<EnergyRecord>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Coarse-to-fine blind deconvolution with delayed kernel projection.
///
/// Each level starts from the upsampled previous estimate (or `pad(f)` and a uniform
/// kernel at the coarsest level). Every iteration takes one `u` gradient step, one
/// unconstrained `k` gradient step, clamps and normalizes `k`, then anneals λ.
pub fn deblur_blind(f: &Image, cfg: &DeblurConfig) -> Result<BlindResult> {
    let levels = build_pyramid(f, cfg)?;
    let model = GradientModel {
        tv_epsilon: cfg.tv_epsilon,
        color: cfg.color,
        boundary: cfg.boundary,
        filtered: cfg.filtered_kernel_estimation,
    };
    let mut log = Vec::new();
    let mut state: Option<(Image, Kernel)> = None;
    let mut lambda = cfg.lambda_init;

    for level in &levels {
        let (kw, kh) = (level.kernel_width, level.kernel_height);
        let fl = &level.f;
        let latent = initial_latent(fl, kw, kh, cfg.boundary)?;
        let (mut u, mut k) = match state.take() {
            None => (latent, Kernel::uniform(kw, kh)?),
            Some((pu, pk)) => {
                let u = resize_bilinear(&pu, latent.width(), latent.height())?;
                (u, resize_kernel(&pk, kw, kh)?)
            }
        };
        if cfg.anneal_restart_per_level {
            lambda = cfg.lambda_init;
        }
        let mut eps_u = cfg.eps_u;
        let mut prev_energy = f64::INFINITY;

        for it in 0..cfg.max_iters_per_level {
            let gu = u_gradient(&u, fl, &k, lambda, &model)?;
            let step_u = match cfg.step_rule {
                StepRule::Normalized => cfg.eps_u * u.max_abs().max(1e-31) / max_abs(gu.data()).max(1e-31),
                StepRule::FixedBacktracking => eps_u,
            };
            let mut un = u.clone();
            un.axpy(-step_u, &gu);
            let mut energy = model_energy(&un, fl, &k, lambda, &model)?;
            if cfg.step_rule == StepRule::FixedBacktracking {
                let mut tries = 0;
                while energy > prev_energy && tries < 30 {
                    eps_u *= 0.5;
                    un = u.clone();
                    un.axpy(-eps_u, &gu);
                    energy = model_energy(&un, fl, &k, lambda, &model)?;
                    tries += 1;
                }
            }
            if !energy.is_finite() || !un.all_finite() {
                return Err(Error::Divergence { level: level.index, iter: it });
            }
            u = un;
            log.push(EnergyRecord { level: level.index, iteration: it, lambda, energy });

            let gk = k_gradient(&k, fl, &u, &model)?;
            let step_k = match cfg.step_rule {
                StepRule::Normalized => {
                    let kmax = k.data().iter().copied().fold(0.0, f64::max);
                    cfg.eps_k * kmax.max(1e-31) / max_abs(gk.data()).max(1e-31)
                }
                StepRule::FixedBacktracking => cfg.eps_k,
            };
            let raw = Kernel::new(kw, kh, k.data().iter().zip(gk.data()).map(|(a, g)| a - step_k * g).collect())
                .map_err(|_| Error::Divergence { level: level.index, iter: it })?;
            k = project_kernel(&raw)?;
            prev_energy = model_energy(&u, fl, &k, lambda, &model)?;
            lambda = (cfg.anneal_factor * lambda).max(cfg.lambda_min);
        }
        state = Some((u, k));
    }
    let (u, k) = state.expect("at least one pyramid level");
    Ok(BlindResult { u, k, energy_log: log })
}
