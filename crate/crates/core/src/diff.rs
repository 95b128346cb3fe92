//! Forward differences, divergence and TV-type functionals.

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TvVariant {
    Isotropic,
    Anisotropic,
}

/// How the TV term treats multiple channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorMode {
    /// Each channel regularized independently.
    Grayscale,
    /// One gradient magnitude shared across channels (root-sum-square).
    Coupled,
}

impl std::str::FromStr for ColorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gray" | "grayscale" => Ok(ColorMode::Grayscale),
            "coupled" | "coupled_color" => Ok(ColorMode::Coupled),
            _ => Err(Error::Parse(format!("unknown color mode '{s}'"))),
        }
    }
}

/// Forward differences per channel; the last column (x) and last row (y) are zero.
pub fn gradient(u: &Image) -> (Image, Image) {
    let (w, h) = (u.width(), u.height());
    let mut gx = Image::zeros(w, h, u.channels());
    let mut gy = Image::zeros(w, h, u.channels());
    for c in 0..u.channels() {
        let p = u.plane(c);
        let dx = gx.plane_mut(c);
        for y in 0..h {
            for x in 0..w - 1 {
                dx[y * w + x] = p[y * w + x + 1] - p[y * w + x];
            }
        }
        let dy = gy.plane_mut(c);
        for y in 0..h - 1 {
            for x in 0..w {
                dy[y * w + x] = p[(y + 1) * w + x] - p[y * w + x];
            }
        }
    }
    (gx, gy)
}

/// Negative adjoint of [`gradient`]: `⟨∇u, p⟩ = −⟨u, div p⟩`.
pub fn divergence(px: &Image, py: &Image) -> Image {
    let (w, h) = (px.width(), px.height());
    let mut d = Image::zeros(w, h, px.channels());
    for c in 0..px.channels() {
        let ax = px.plane(c);
        let ay = py.plane(c);
        let out = d.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let mut v = 0.0;
                if x + 1 < w {
                    v += ax[i];
                }
                if x > 0 {
                    v -= ax[i - 1];
                }
                if y + 1 < h {
                    v += ay[i];
                }
                if y > 0 {
                    v -= ay[i - w];
                }
                out[i] = v;
            }
        }
    }
    d
}

fn require_single(u: &Image) -> Result<()> {
    if u.channels() != 1 {
        return Err(Error::Dimension(format!("expected one channel, got {}", u.channels())));
    }
    Ok(())
}

pub fn tv_norm(u: &Image, variant: TvVariant) -> Result<f64> {
    require_single(u)?;
    let (gx, gy) = gradient(u);
    let it = gx.data().iter().zip(gy.data());
    Ok(match variant {
        TvVariant::Isotropic => it.map(|(a, b)| a.hypot(*b)).sum(),
        TvVariant::Anisotropic => it.map(|(a, b)| a.abs() + b.abs()).sum(),
    })
}

/// `(Σ_x ‖∇u(x)‖_p^p)^(1/p)`, or the largest component magnitude for `p = ∞`.
pub fn grad_lp_norm(u: &Image, p: f64) -> Result<f64> {
    require_single(u)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("p must be in [1, inf], got {p}")));
    }
    let (gx, gy) = gradient(u);
    let it = gx.data().iter().chain(gy.data());
    if p.is_infinite() {
        return Ok(it.fold(0.0, |m, v| m.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(it.map(|v| v.abs()).sum());
    }
    Ok(it.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Per-pixel smoothed gradient magnitude `√(u_x² + u_y² + ε²)`, one plane per channel
/// for grayscale mode or a single shared plane for coupled mode.
fn magnitudes(gx: &Image, gy: &Image, eps: f64, mode: ColorMode) -> Vec<f64> {
    let n = gx.plane_len();
    let e2 = eps * eps;
    match mode {
        ColorMode::Grayscale => gx.data().iter().zip(gy.data()).map(|(a, b)| (a * a + b * b + e2).sqrt()).collect(),
        ColorMode::Coupled => (0..n)
            .map(|i| {
                let s: f64 = (0..gx.channels())
                    .map(|c| {
                        let a = gx.plane(c)[i];
                        let b = gy.plane(c)[i];
                        a * a + b * b
                    })
                    .sum();
                (s + e2).sqrt()
            })
            .collect(),
    }
}

/// Smoothed TV energy.
pub fn smoothed_tv(u: &Image, eps: f64, mode: ColorMode) -> f64 {
    let (gx, gy) = gradient(u);
    magnitudes(&gx, &gy, eps, mode).iter().sum()
}

/// Gradient of [`smoothed_tv`]: `−div(∇u / |∇u|_ε)`.
pub fn smoothed_tv_gradient(u: &Image, eps: f64, mode: ColorMode) -> Image {
    let (mut gx, mut gy) = gradient(u);
    let mag = magnitudes(&gx, &gy, eps, mode);
    let n = u.plane_len();
    for c in 0..u.channels() {
        let m: &[f64] = match mode {
            ColorMode::Grayscale => &mag[c * n..(c + 1) * n],
            ColorMode::Coupled => &mag,
        };
        for (v, d) in gx.plane_mut(c).iter_mut().zip(m) {
            *v /= d;
        }
        for (v, d) in gy.plane_mut(c).iter_mut().zip(m) {
            *v /= d;
        }
    }
    divergence(&gx, &gy).scale(-1.0)
}
