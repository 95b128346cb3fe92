//! Valid (free-boundary), full and boundary-assuming convolutions.
//!
//! Kernels are stored in window orientation (see [`Kernel`]), so `convolve_valid` is a
//! plain sliding dot product and `convolve_full` is its exact adjoint.

use crate::error::{Error, Result};
use crate::image::{BoundaryMode, Image, Kernel};

pub(crate) fn valid_plane(u: &[f64], uw: usize, uh: usize, k: &[f64], kw: usize, kh: usize, out: &mut [f64]) {
    let ow = uw - kw + 1;
    let oh = uh - kh + 1;
    debug_assert_eq!(out.len(), ow * oh);
    out.iter_mut().for_each(|v| *v = 0.0);
    for y in 0..oh {
        let orow = &mut out[y * ow..(y + 1) * ow];
        for r in 0..kh {
            let urow = &u[(y + r) * uw..(y + r + 1) * uw];
            for c in 0..kw {
                let kv = k[r * kw + c];
                if kv == 0.0 {
                    continue;
                }
                for (o, &uv) in orow.iter_mut().zip(&urow[c..c + ow]) {
                    *o += kv * uv;
                }
            }
        }
    }
}

pub(crate) fn full_plane(v: &[f64], vw: usize, vh: usize, k: &[f64], kw: usize, kh: usize, out: &mut [f64]) {
    let ow = vw + kw - 1;
    debug_assert_eq!(out.len(), ow * (vh + kh - 1));
    out.iter_mut().for_each(|o| *o = 0.0);
    for y in 0..vh {
        let vrow = &v[y * vw..(y + 1) * vw];
        for r in 0..kh {
            let base = (y + r) * ow;
            for c in 0..kw {
                let kv = k[r * kw + c];
                if kv == 0.0 {
                    continue;
                }
                for (o, &x) in out[base + c..base + c + vw].iter_mut().zip(vrow) {
                    *o += kv * x;
                }
            }
        }
    }
}

fn check_fits(u: &Image, kw: usize, kh: usize) -> Result<()> {
    if u.width() < kw || u.height() < kh {
        return Err(Error::Dimension(format!(
            "kernel {kw}x{kh} larger than image {}x{}",
            u.width(),
            u.height()
        )));
    }
    Ok(())
}

/// Free-boundary convolution: output is (m−h+1)×(n−w+1) and reads only inside `u`.
pub fn convolve_valid(u: &Image, k: &Kernel) -> Result<Image> {
    check_fits(u, k.width(), k.height())?;
    let ow = u.width() - k.width() + 1;
    let oh = u.height() - k.height() + 1;
    let mut out = Image::zeros(ow, oh, u.channels());
    for c in 0..u.channels() {
        valid_plane(u.plane(c), u.width(), u.height(), k.data(), k.width(), k.height(), out.plane_mut(c));
    }
    Ok(out)
}

/// Full convolution with zero padding: output is (m+h−1)×(n+w−1).
/// This is the adjoint of [`convolve_valid`] with respect to `u`.
pub fn convolve_full(v: &Image, k: &Kernel) -> Image {
    let ow = v.width() + k.width() - 1;
    let oh = v.height() + k.height() - 1;
    let mut out = Image::zeros(ow, oh, v.channels());
    for c in 0..v.channels() {
        full_plane(v.plane(c), v.width(), v.height(), k.data(), k.width(), k.height(), out.plane_mut(c));
    }
    out
}

/// Gradient of `½‖valid(u, k) − f‖²` with respect to `k`, given the residual.
/// Channels are summed. Output has the kernel dimensions `(u − r + 1)`.
pub fn kernel_correlation(u: &Image, residual: &Image) -> Result<Kernel> {
    if u.channels() != residual.channels() {
        return Err(Error::Dimension("channel count mismatch".into()));
    }
    check_fits(u, residual.width(), residual.height())?;
    let kw = u.width() - residual.width() + 1;
    let kh = u.height() - residual.height() + 1;
    if kw.is_multiple_of(2) || kh.is_multiple_of(2) {
        return Err(Error::Dimension(format!("implied kernel size {kw}x{kh} is not odd")));
    }
    let mut acc = vec![0.0; kw * kh];
    let mut tmp = vec![0.0; kw * kh];
    for c in 0..u.channels() {
        valid_plane(
            u.plane(c),
            u.width(),
            u.height(),
            residual.plane(c),
            residual.width(),
            residual.height(),
            &mut tmp,
        );
        for (a, t) in acc.iter_mut().zip(&tmp) {
            *a += t;
        }
    }
    Ok(Kernel::from_raw(kw, kh, acc))
}

/// Maps an out-of-range index into `0..n` according to the boundary rule.
pub(crate) fn resolve(i: isize, n: usize, mode: BoundaryMode) -> usize {
    let n_i = n as isize;
    match mode {
        BoundaryMode::Replicate | BoundaryMode::ValidFree => i.clamp(0, n_i - 1) as usize,
        BoundaryMode::Periodic => i.rem_euclid(n_i) as usize,
        BoundaryMode::Symmetric => {
            let m = i.rem_euclid(2 * n_i);
            if m < n_i {
                m as usize
            } else {
                (2 * n_i - 1 - m) as usize
            }
        }
    }
}

/// Extends `u` by `px` columns and `py` rows on each side.
pub fn pad(u: &Image, px: usize, py: usize, mode: BoundaryMode) -> Result<Image> {
    if mode == BoundaryMode::ValidFree {
        return Err(Error::InvalidArgument("valid-free mode defines no padding".into()));
    }
    let (w, h) = (u.width(), u.height());
    let (pw, ph) = (w + 2 * px, h + 2 * py);
    let mut out = Image::zeros(pw, ph, u.channels());
    for c in 0..u.channels() {
        let src = u.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..ph {
            let sy = resolve(y as isize - py as isize, h, mode);
            for x in 0..pw {
                let sx = resolve(x as isize - px as isize, w, mode);
                dst[y * pw + x] = src[sy * w + sx];
            }
        }
    }
    Ok(out)
}

/// Adjoint of [`pad`]: folds each padded sample back onto its source pixel.
pub fn pad_adjoint(g: &Image, px: usize, py: usize, mode: BoundaryMode) -> Result<Image> {
    if mode == BoundaryMode::ValidFree {
        return Err(Error::InvalidArgument("valid-free mode defines no padding".into()));
    }
    if g.width() <= 2 * px || g.height() <= 2 * py {
        return Err(Error::Dimension("padded image smaller than its border".into()));
    }
    let (pw, ph) = (g.width(), g.height());
    let (w, h) = (pw - 2 * px, ph - 2 * py);
    let mut out = Image::zeros(w, h, g.channels());
    for c in 0..g.channels() {
        let src = g.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..ph {
            let sy = resolve(y as isize - py as isize, h, mode);
            for x in 0..pw {
                let sx = resolve(x as isize - px as isize, w, mode);
                dst[sy * w + sx] += src[y * pw + x];
            }
        }
    }
    Ok(out)
}

/// Same-size convolution with out-of-support reads resolved by `mode`.
pub fn convolve_boundary(u: &Image, k: &Kernel, mode: BoundaryMode) -> Result<Image> {
    if mode == BoundaryMode::ValidFree {
        return Err(Error::InvalidArgument(
            "convolve_boundary needs a boundary-assuming mode; use convolve_valid".into(),
        ));
    }
    check_fits(u, k.width(), k.height())?;
    let padded = pad(u, k.width() / 2, k.height() / 2, mode)?;
    convolve_valid(&padded, k)
}

/// Adjoint of [`convolve_boundary`] with respect to `u`.
pub fn convolve_boundary_adjoint(v: &Image, k: &Kernel, mode: BoundaryMode) -> Result<Image> {
    pad_adjoint(&convolve_full(v, k), k.width() / 2, k.height() / 2, mode)
}

/// Size of the latent image that explains an observation of size `fw × fh`.
pub fn latent_size(fw: usize, fh: usize, kw: usize, kh: usize, mode: BoundaryMode) -> (usize, usize) {
    match mode {
        BoundaryMode::ValidFree => (fw + kw - 1, fh + kh - 1),
        _ => (fw, fh),
    }
}

/// The blur model `u ↦ f` under the given boundary rule.
pub fn blur_forward(u: &Image, k: &Kernel, mode: BoundaryMode) -> Result<Image> {
    match mode {
        BoundaryMode::ValidFree => convolve_valid(u, k),
        m => convolve_boundary(u, k, m),
    }
}

/// Adjoint of [`blur_forward`] with respect to `u`.
pub fn blur_adjoint(r: &Image, k: &Kernel, mode: BoundaryMode) -> Result<Image> {
    match mode {
        BoundaryMode::ValidFree => Ok(convolve_full(r, k)),
        m => convolve_boundary_adjoint(r, k, m),
    }
}

/// Gradient of `⟨blur_forward(u, k), r⟩` with respect to `k`.
pub fn blur_kernel_gradient(u: &Image, r: &Image, kw: usize, kh: usize, mode: BoundaryMode) -> Result<Kernel> {
    match mode {
        BoundaryMode::ValidFree => kernel_correlation(u, r),
        m => kernel_correlation(&pad(u, kw / 2, kh / 2, m)?, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |_, _| rng.random_range(-1.0..1.0))
    }

    fn rand_kernel(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Kernel {
        Kernel::new(w, h, (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    // Brute force in the textbook form: flipped kernel, true convolution sum.
    fn brute_valid(u: &Image, k: &Kernel) -> Image {
        let (kw, kh) = (k.width(), k.height());
        let ow = u.width() - kw + 1;
        let oh = u.height() - kh + 1;
        Image::from_fn(ow, oh, |x, y| {
            let mut s = 0.0;
            // output (x,y) corresponds to centre (x+kw/2, y+kh/2) of u
            let cx = (x + kw / 2) as isize;
            let cy = (y + kh / 2) as isize;
            for dy in -(kh as isize / 2)..=(kh as isize / 2) {
                for dx in -(kw as isize / 2)..=(kw as isize / 2) {
                    // mathematical kernel kc[d] = stored k[-d]
                    let kc = k.get((kw as isize / 2 - dx) as usize, (kh as isize / 2 - dy) as usize);
                    s += kc * u.get((cx - dx) as usize, (cy - dy) as usize);
                }
            }
            s
        })
    }

    #[test]
    fn valid_support_size() {
        let u = Image::zeros(10, 10, 1);
        let k = Kernel::uniform(3, 3).unwrap();
        let f = convolve_valid(&u, &k).unwrap();
        assert_eq!((f.width(), f.height()), (8, 8));
    }

    #[test]
    fn valid_rejects_large_kernel() {
        let u = Image::zeros(2, 5, 1);
        let k = Kernel::uniform(3, 3).unwrap();
        assert!(matches!(convolve_valid(&u, &k), Err(Error::Dimension(_))));
    }

    #[test]
    fn valid_delta_is_central_crop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = rand_image(&mut rng, 9, 7);
        let k = Kernel::delta(5, 3).unwrap();
        let f = convolve_valid(&u, &k).unwrap();
        assert_eq!(f, u.crop(2, 1, 5, 5).unwrap());
    }

    #[test]
    fn valid_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let u = rand_image(&mut rng, 8, 6);
            let k = rand_kernel(&mut rng, 3, 5);
            let a = convolve_valid(&u, &k).unwrap();
            let b = brute_valid(&u, &k);
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn valid_on_step_gives_blurred_step() {
        // step on [-5, 5]: U1=0 for x<0, U2=1 for x>=0
        let u: Vec<f64> = (-5..=5).map(|x| if x < 0 { 0.0 } else { 1.0 }).collect();
        let k = Kernel::from_taps(&[0.2, 0.5, 0.3]).unwrap();
        let f = convolve_valid(&Image::from_signal(&u), &k).unwrap();
        // f lives on x in [-4, 4]; f[-1] = 0.3, f[0] = 0.8
        let expect = [0.0, 0.0, 0.0, 0.3, 0.8, 1.0, 1.0, 1.0, 1.0];
        for (a, b) in f.data().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn full_support_and_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = rand_image(&mut rng, 8, 8);
        let k = Kernel::delta(3, 3).unwrap();
        let g = convolve_full(&v, &k);
        assert_eq!((g.width(), g.height()), (10, 10));
        assert_eq!(g.crop(1, 1, 8, 8).unwrap(), v);
        assert_eq!(g.sum(), v.sum());
    }

    #[test]
    fn full_is_adjoint_of_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let u = rand_image(&mut rng, 5, 5);
            let k = rand_kernel(&mut rng, 3, 3);
            let v = rand_image(&mut rng, 3, 3);
            let lhs = convolve_valid(&u, &k).unwrap().dot(&v);
            let rhs = u.dot(&convolve_full(&v, &k));
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn kernel_correlation_is_k_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = rand_image(&mut rng, 7, 6);
        let k = rand_kernel(&mut rng, 3, 3);
        let r = rand_image(&mut rng, 5, 4);
        // <valid(u,k), r> is linear in k with gradient kernel_correlation(u, r)
        let g = kernel_correlation(&u, &r).unwrap();
        let lhs = convolve_valid(&u, &k).unwrap().dot(&r);
        let rhs: f64 = g.data().iter().zip(k.data()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn boundary_constant_is_fixed_point() {
        let u = Image::filled(6, 5, 0.37);
        let k = Kernel::new(3, 3, vec![0.1, 0.2, 0.05, 0.05, 0.2, 0.1, 0.1, 0.1, 0.1]).unwrap();
        for mode in [BoundaryMode::Symmetric, BoundaryMode::Periodic, BoundaryMode::Replicate] {
            let out = convolve_boundary(&u, &k, mode).unwrap();
            assert!(out.data().iter().all(|v| (v - 0.37).abs() < 1e-15));
        }
    }

    #[test]
    fn boundary_rejects_valid_free() {
        let u = Image::filled(6, 5, 0.0);
        let k = Kernel::delta(3, 3).unwrap();
        assert!(convolve_boundary(&u, &k, BoundaryMode::ValidFree).is_err());
    }

    #[test]
    fn replicate_ramp() {
        let u = Image::from_signal(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let k = Kernel::from_taps(&[1.0 / 3.0; 3]).unwrap();
        let out = convolve_boundary(&u, &k, BoundaryMode::Replicate).unwrap();
        let expect = [1.0 / 3.0, 1.0, 2.0, 3.0, 4.0, 14.0 / 3.0];
        for (a, b) in out.data().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn periodic_matches_circular_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let u = rand_image(&mut rng, 6, 6);
            let k = rand_kernel(&mut rng, 3, 5);
            let out = convolve_boundary(&u, &k, BoundaryMode::Periodic).unwrap();
            for y in 0..6 {
                for x in 0..6 {
                    let mut s = 0.0;
                    for r in 0..5 {
                        for c in 0..3 {
                            let sx = (x as isize + c as isize - 1).rem_euclid(6) as usize;
                            let sy = (y as isize + r as isize - 2).rem_euclid(6) as usize;
                            s += k.get(c, r) * u.get(sx, sy);
                        }
                    }
                    assert!((out.get(x, y) - s).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetric_pad_mirrors_with_edge_repeat() {
        let u = Image::from_signal(&[1.0, 2.0, 3.0]);
        let p = pad(&u, 4, 0, BoundaryMode::Symmetric).unwrap();
        assert_eq!(p.data(), &[3.0, 3.0, 2.0, 1.0, 1.0, 2.0, 3.0, 3.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn pad_adjoint_pairs_with_pad() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mode in [BoundaryMode::Symmetric, BoundaryMode::Periodic, BoundaryMode::Replicate] {
            let u = rand_image(&mut rng, 4, 5);
            let g = rand_image(&mut rng, 4 + 6, 5 + 2);
            let lhs = pad(&u, 3, 1, mode).unwrap().dot(&g);
            let rhs = u.dot(&pad_adjoint(&g, 3, 1, mode).unwrap());
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_gradient_all_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for mode in BoundaryMode::ALL {
            let (uw, uh) = latent_size(5, 4, 3, 3, mode);
            let u = rand_image(&mut rng, uw, uh);
            let r = rand_image(&mut rng, 5, 4);
            let k = rand_kernel(&mut rng, 3, 3);
            let g = blur_kernel_gradient(&u, &r, 3, 3, mode).unwrap();
            let lhs = blur_forward(&u, &k, mode).unwrap().dot(&r);
            let rhs: f64 = g.data().iter().zip(k.data()).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12, "{mode}");
            let adj = u.dot(&blur_adjoint(&r, &k, mode).unwrap());
            assert!((lhs - adj).abs() < 1e-12, "{mode}");
        }
    }

    #[test]
    fn boundary_adjoint_pairs_with_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for mode in [BoundaryMode::Symmetric, BoundaryMode::Periodic, BoundaryMode::Replicate] {
            let u = rand_image(&mut rng, 6, 5);
            let v = rand_image(&mut rng, 6, 5);
            let k = rand_kernel(&mut rng, 3, 3);
            let lhs = convolve_boundary(&u, &k, mode).unwrap().dot(&v);
            let rhs = u.dot(&convolve_boundary_adjoint(&v, &k, mode).unwrap());
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
