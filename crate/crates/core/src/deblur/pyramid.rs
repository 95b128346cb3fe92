use super::DeblurConfig;
use crate::error::{Error, Result};
use crate::image::{Image, Kernel};

/// One scale of the coarse-to-fine scheme.
#[derive(Clone, Debug)]
pub struct PyramidLevel {
    /// 0 is the coarsest level.
    pub index: usize,
    /// Image scale relative to the input.
    pub scale: f64,
    pub f: Image,
    pub kernel_width: usize,
    pub kernel_height: usize,
}

fn nearest_odd(x: f64) -> usize {
    let v = 2.0 * ((x - 1.0) / 2.0).round() + 1.0;
    v.max(1.0) as usize
}

/// Kernel sizes from finest to coarsest; the larger side decreases strictly down to 3.
fn kernel_schedule(kw: usize, kh: usize, factor: f64) -> Vec<(usize, usize)> {
    let big = kw.max(kh);
    let mut seq = vec![big];
    while *seq.last().unwrap() > 3 {
        let last = *seq.last().unwrap();
        let mut next = nearest_odd(last as f64 * factor).max(3);
        if next >= last {
            next = last - 2;
        }
        seq.push(next);
    }
    seq.iter()
        .map(|&s| {
            let r = s as f64 / big as f64;
            let w = if kw == big { s } else { nearest_odd(kw as f64 * r).clamp(3, kw) };
            let h = if kh == big { s } else { nearest_odd(kh as f64 * r).clamp(3, kh) };
            (w, h)
        })
        .collect()
}

/// Bilinear resampling with pixel centres aligned; reads beyond the edge are clamped.
pub fn resize_bilinear(img: &Image, width: usize, height: usize) -> Result<Image> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension("resize to an empty image".into()));
    }
    let (sw, sh) = (img.width(), img.height());
    if (sw, sh) == (width, height) {
        return Ok(img.clone());
    }
    let sx = sw as f64 / width as f64;
    let sy = sh as f64 / height as f64;
    let coord = |d: usize, s: f64, n: usize| -> (usize, usize, f64) {
        let p = ((d as f64 + 0.5) * s - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = p.floor() as usize;
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, p - i0 as f64)
    };
    let mut out = Image::zeros(width, height, img.channels());
    for c in 0..img.channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..height {
            let (y0, y1, ty) = coord(y, sy, sh);
            for x in 0..width {
                let (x0, x1, tx) = coord(x, sx, sw);
                let top = src[y0 * sw + x0] * (1.0 - tx) + src[y0 * sw + x1] * tx;
                let bot = src[y1 * sw + x0] * (1.0 - tx) + src[y1 * sw + x1] * tx;
                dst[y * width + x] = top * (1.0 - ty) + bot * ty;
            }
        }
    }
    Ok(out)
}

/// Resamples a kernel about its centre (zero outside the support), then re-projects it
/// onto the feasible set.
pub fn resize_kernel(k: &Kernel, width: usize, height: usize) -> Result<Kernel> {
    let (sw, sh) = (k.width() as f64, k.height() as f64);
    let cx_s = (sw - 1.0) / 2.0;
    let cy_s = (sh - 1.0) / 2.0;
    let cx_d = (width as f64 - 1.0) / 2.0;
    let cy_d = (height as f64 - 1.0) / 2.0;
    let rx = sw / width as f64;
    let ry = sh / height as f64;
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= k.width() as isize || y >= k.height() as isize {
            0.0
        } else {
            k.get(x as usize, y as usize)
        }
    };
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let py = cy_s + (y as f64 - cy_d) * ry;
        let y0 = py.floor();
        let ty = py - y0;
        for x in 0..width {
            let px = cx_s + (x as f64 - cx_d) * rx;
            let x0 = px.floor();
            let tx = px - x0;
            let (xi, yi) = (x0 as isize, y0 as isize);
            let v = (at(xi, yi) * (1.0 - tx) + at(xi + 1, yi) * tx) * (1.0 - ty)
                + (at(xi, yi + 1) * (1.0 - tx) + at(xi + 1, yi + 1) * tx) * ty;
            data.push(v);
        }
    }
    super::project_kernel(&Kernel::new(width, height, data)?)
}

/// Levels from coarsest (3-wide kernel on the larger side) to finest (the input).
pub fn build_pyramid(f: &Image, cfg: &DeblurConfig) -> Result<Vec<PyramidLevel>> {
    cfg.validate()?;
    let (kw, kh) = (cfg.kernel_width, cfg.kernel_height);
    if f.width() < kw || f.height() < kh {
        return Err(Error::Dimension(format!("image {}x{} smaller than kernel {kw}x{kh}", f.width(), f.height())));
    }
    let mut sched = kernel_schedule(kw, kh, cfg.pyramid_factor);
    if let Some(n) = cfg.max_levels {
        sched.truncate(n);
    }
    let big = kw.max(kh) as f64;
    let mut levels = Vec::with_capacity(sched.len());
    for (i, &(w, h)) in sched.iter().enumerate().rev() {
        let scale = if i == 0 { 1.0 } else { w.max(h) as f64 / big };
        let fl = if i == 0 {
            f.clone()
        } else {
            let fw = ((f.width() as f64 * scale).round() as usize).max(w);
            let fh = ((f.height() as f64 * scale).round() as usize).max(h);
            resize_bilinear(f, fw, fh)?
        };
        levels.push(PyramidLevel { index: levels.len(), scale, f: fl, kernel_width: w, kernel_height: h });
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(k: usize) -> Vec<usize> {
        let cfg = DeblurConfig::default().with_kernel_size(k, k);
        build_pyramid(&Image::filled(64, 64, 0.5), &cfg).unwrap().iter().map(|l| l.kernel_width).collect()
    }

    #[test]
    fn three_is_single_level() {
        assert_eq!(sizes(3), vec![3]);
    }

    #[test]
    fn nine_decreases_to_three() {
        let s = sizes(9);
        assert_eq!(s.first(), Some(&3));
        assert_eq!(s.last(), Some(&9));
        for w in s.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(s, vec![3, 5, 7, 9]);
    }

    #[test]
    fn rectangular_kernel_schedule() {
        let cfg = DeblurConfig::default().with_kernel_size(9, 3);
        let levels = build_pyramid(&Image::filled(40, 30, 0.5), &cfg).unwrap();
        assert_eq!(levels.first().map(|l| (l.kernel_width, l.kernel_height)), Some((3, 3)));
        assert!(levels.iter().all(|l| l.kernel_height == 3 && l.kernel_width % 2 == 1));
    }

    #[test]
    fn level_limit_keeps_finest() {
        let cfg = DeblurConfig { max_levels: Some(2), ..DeblurConfig::default().with_kernel_size(9, 9) };
        let l = build_pyramid(&Image::filled(64, 64, 0.5), &cfg).unwrap();
        assert_eq!(l.iter().map(|l| l.kernel_width).collect::<Vec<_>>(), vec![7, 9]);
        assert_eq!(l.last().unwrap().f.width(), 64);
    }

    #[test]
    fn coarse_images_shrink() {
        let cfg = DeblurConfig::default().with_kernel_size(9, 9);
        let l = build_pyramid(&Image::filled(64, 64, 0.5), &cfg).unwrap();
        for w in l.windows(2) {
            assert!(w[0].f.width() < w[1].f.width());
        }
        assert!(l[0].f.data().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn resize_identity_and_constant() {
        let img = Image::from_fn(5, 4, |x, y| (x * y) as f64);
        assert_eq!(resize_bilinear(&img, 5, 4).unwrap(), img);
        let c = Image::filled(7, 7, 0.3);
        let r = resize_bilinear(&c, 10, 5).unwrap();
        assert!(r.data().iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn upsampled_kernel_is_feasible() {
        let k = Kernel::new(3, 3, vec![0.0, 0.1, 0.0, 0.2, 0.4, 0.1, 0.0, 0.2, 0.0]).unwrap();
        for s in [5, 7, 3] {
            let r = resize_kernel(&k, s, s).unwrap();
            assert!(r.is_feasible(1e-12));
            assert_eq!((r.width(), r.height()), (s, s));
        }
        let d = resize_kernel(&Kernel::delta(3, 3).unwrap(), 3, 3).unwrap();
        assert_eq!(d, Kernel::delta(3, 3).unwrap());
    }
}
