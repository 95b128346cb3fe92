use crate::conv::{blur_adjoint, blur_forward, blur_kernel_gradient, convolve_valid, kernel_correlation, pad};
use crate::diff::{smoothed_tv, smoothed_tv_gradient, ColorMode};
use crate::error::{Error, Result};
use crate::image::{BoundaryMode, Image, Kernel};

/// Clamps negative entries to zero, then divides by the L1 norm.
pub fn project_kernel(k: &Kernel) -> Result<Kernel> {
    let clamped: Vec<f64> = k.data().iter().map(|&v| v.max(0.0)).collect();
    let s: f64 = clamped.iter().sum();
    if !(s > 1e-12) {
        return Err(Error::DegenerateKernel(s));
    }
    Kernel::new(k.width(), k.height(), clamped.into_iter().map(|v| v / s).collect())
}

/// Model choices shared by the gradient steps.
#[derive(Clone, Copy, Debug)]
pub struct GradientModel {
    pub tv_epsilon: f64,
    pub color: ColorMode,
    pub boundary: BoundaryMode,
    /// Fit `k` on horizontal and vertical differences instead of intensities.
    pub filtered: bool,
}

impl Default for GradientModel {
    fn default() -> Self {
        Self { tv_epsilon: 1e-4, color: ColorMode::Grayscale, boundary: BoundaryMode::ValidFree, filtered: false }
    }
}

/// `½‖A_k u − f‖²`
pub fn data_energy(u: &Image, f: &Image, k: &Kernel, boundary: BoundaryMode) -> Result<f64> {
    Ok(0.5 * blur_forward(u, k, boundary)?.sub(f).sq_norm())
}

/// `½‖A_k u − f‖² + λ·TV_ε(u)`
pub fn model_energy(u: &Image, f: &Image, k: &Kernel, lambda: f64, model: &GradientModel) -> Result<f64> {
    Ok(data_energy(u, f, k, model.boundary)? + lambda * smoothed_tv(u, model.tv_epsilon, model.color))
}

/// Gradient of [`model_energy`] in `u`: `A_kᵀ(A_k u − f) − λ·div(∇u/|∇u|_ε)`.
pub fn u_gradient(u: &Image, f: &Image, k: &Kernel, lambda: f64, model: &GradientModel) -> Result<Image> {
    let r = blur_forward(u, k, model.boundary)?.sub(f);
    let mut g = blur_adjoint(&r, k, model.boundary)?;
    g.axpy(lambda, &smoothed_tv_gradient(u, model.tv_epsilon, model.color));
    Ok(g)
}

/// One explicit step `u − eps_u·∇_u E`.
pub fn u_gradient_step(u: &Image, f: &Image, k: &Kernel, lambda: f64, eps_u: f64, model: &GradientModel) -> Result<Image> {
    let g = u_gradient(u, f, k, lambda, model)?;
    let mut out = u.clone();
    out.axpy(-eps_u, &g);
    Ok(out)
}

fn valid_diff(img: &Image, horizontal: bool) -> Image {
    let (w, h) = (img.width(), img.height());
    let (ow, oh) = if horizontal { (w - 1, h) } else { (w, h - 1) };
    let mut out = Image::zeros(ow, oh, img.channels());
    for c in 0..img.channels() {
        let p = img.plane(c);
        let o = out.plane_mut(c);
        for y in 0..oh {
            for x in 0..ow {
                let next = if horizontal { p[y * w + x + 1] } else { p[(y + 1) * w + x] };
                o[y * ow + x] = next - p[y * w + x];
            }
        }
    }
    out
}

/// Gradient of the `k` data term. In filtered mode the term is
/// `½Σ_d ‖k∘(∂_d P u) − ∂_d f‖²` over both difference directions, where `P` is the
/// boundary extension (identity for the free boundary).
pub fn k_gradient(k: &Kernel, f: &Image, u: &Image, model: &GradientModel) -> Result<Kernel> {
    if !model.filtered {
        let r = blur_forward(u, k, model.boundary)?.sub(f);
        return blur_kernel_gradient(u, &r, k.width(), k.height(), model.boundary);
    }
    let pu = extend(u, k, model.boundary)?;
    let mut acc = vec![0.0; k.len()];
    for horizontal in [true, false] {
        let ud = valid_diff(&pu, horizontal);
        let r = convolve_valid(&ud, k)?.sub(&valid_diff(f, horizontal));
        let g = kernel_correlation(&ud, &r)?;
        for (a, v) in acc.iter_mut().zip(g.data()) {
            *a += v;
        }
    }
    Kernel::new(k.width(), k.height(), acc)
}

fn extend(u: &Image, k: &Kernel, boundary: BoundaryMode) -> Result<Image> {
    match boundary {
        BoundaryMode::ValidFree => Ok(u.clone()),
        m => pad(u, k.width() / 2, k.height() / 2, m),
    }
}

/// Filtered-mode `k` data energy, matching [`k_gradient`].
pub fn filtered_data_energy(k: &Kernel, f: &Image, u: &Image, boundary: BoundaryMode) -> Result<f64> {
    let pu = extend(u, k, boundary)?;
    let mut e = 0.0;
    for horizontal in [true, false] {
        let r = convolve_valid(&valid_diff(&pu, horizontal), k)?.sub(&valid_diff(f, horizontal));
        e += 0.5 * r.sq_norm();
    }
    Ok(e)
}

/// One unconstrained step `k − eps_k·∇_k E`; the result is not projected.
pub fn k_gradient_step(k: &Kernel, f: &Image, u: &Image, eps_k: f64, model: &GradientModel) -> Result<Kernel> {
    let g = k_gradient(k, f, u, model)?;
    Kernel::new(k.width(), k.height(), k.data().iter().zip(g.data()).map(|(a, b)| a - eps_k * b).collect())
}
