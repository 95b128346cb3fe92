//! Synthetic cases, the SSD error ratio and boundary-mode ablations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::conv::convolve_valid;
use crate::deblur::{deblur_blind, deblur_nonblind, DeblurConfig};
use crate::error::{Error, Result};
use crate::image::{BoundaryMode, Image, Kernel};

/// A sharp image, its blur and the observation `f = valid(u0, k0) + n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestCase {
    pub u0: Image,
    pub k0: Kernel,
    pub f: Image,
    pub seed: u64,
}

/// Size parameters for [`make_cases_with`].
#[derive(Clone, Copy, Debug)]
pub struct CaseSpec {
    pub image_size: usize,
    pub kernel_size: usize,
    pub walk_steps: usize,
}

impl Default for CaseSpec {
    fn default() -> Self {
        Self { image_size: 64, kernel_size: 5, walk_steps: 15 }
    }
}

fn case_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64)
}

/// Piecewise-constant cartoon: a random background with 6 to 11 rectangles or disks.
pub fn cartoon(n: usize, rng: &mut impl Rng) -> Image {
    let mut u = Image::filled(n, n, rng.random_range(0.0..1.0));
    let shapes = rng.random_range(6..12);
    let nf = n as f64;
    for _ in 0..shapes {
        let v = rng.random_range(0.0..1.0);
        if rng.random_bool(0.5) {
            let x0 = rng.random_range(0..n.saturating_sub(8).max(1));
            let y0 = rng.random_range(0..n.saturating_sub(8).max(1));
            let w = rng.random_range(6..(n / 2).max(7));
            let h = rng.random_range(6..(n / 2).max(7));
            for y in y0..(y0 + h).min(n) {
                for x in x0..(x0 + w).min(n) {
                    u.set(x, y, v);
                }
            }
        } else {
            let cx = rng.random_range(0.0..nf);
            let cy = rng.random_range(0.0..nf);
            let r = rng.random_range(nf / 16.0..nf / 4.0);
            for y in 0..n {
                for x in 0..n {
                    let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                    if dx * dx + dy * dy < r * r {
                        u.set(x, y, v);
                    }
                }
            }
        }
    }
    u
}

/// Rasterized smooth random-walk trajectory, centred on the support and normalized.
pub fn random_walk_kernel(size: usize, steps: usize, rng: &mut impl Rng) -> Kernel {
    let noise = Normal::new(0.0, 0.6).expect("valid sigma");
    let unit = Normal::new(0.0, 1.0).expect("valid sigma");
    let c = (size as f64 - 1.0) / 2.0;
    for _ in 0..10_000 {
        let mut v = [unit.sample(rng), unit.sample(rng)];
        let mut p = [0.0f64, 0.0];
        let mut pts = Vec::with_capacity(steps * 4);
        for _ in 0..steps * 4 {
            v = [0.7 * v[0] + noise.sample(rng), 0.7 * v[1] + noise.sample(rng)];
            p = [p[0] + 0.5 * v[0], p[1] + 0.5 * v[1]];
            pts.push(p);
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|q| q[0]).sum::<f64>() / n;
        let my = pts.iter().map(|q| q[1]).sum::<f64>() / n;
        let ok = pts.iter().all(|q| {
            let (x, y) = (q[0] - mx + c, q[1] - my + c);
            x >= 0.0 && y >= 0.0 && x <= 2.0 * c && y <= 2.0 * c
        });
        if !ok {
            continue;
        }
        let mut data = vec![0.0; size * size];
        for q in &pts {
            let x = (q[0] - mx + c).round() as usize;
            let y = (q[1] - my + c).round() as usize;
            data[y * size + x] += 1.0;
        }
        let total: f64 = data.iter().sum();
        data.iter_mut().for_each(|d| *d /= total);
        return Kernel::from_raw(size, size, data);
    }
    Kernel::uniform(size, size).expect("odd size")
}

/// Deterministic synthetic suite with the default sizes (64×64 images, 5×5 kernels).
pub fn make_cases(count: usize, seed: u64, noise_sigma: f64) -> Result<Vec<TestCase>> {
    make_cases_with(count, seed, noise_sigma, CaseSpec::default())
}

pub fn make_cases_with(count: usize, seed: u64, noise_sigma: f64, spec: CaseSpec) -> Result<Vec<TestCase>> {
    if count == 0 {
        return Err(Error::InvalidArgument("case count must be at least 1".into()));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise sigma must be >= 0, got {noise_sigma}")));
    }
    if spec.kernel_size.is_multiple_of(2) || spec.kernel_size < 3 || spec.image_size <= spec.kernel_size {
        return Err(Error::InvalidArgument("kernel size must be odd, >= 3 and smaller than the image".into()));
    }
    (0..count)
        .map(|i| {
            let s = case_seed(seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let u0 = cartoon(spec.image_size, &mut rng);
            let k0 = random_walk_kernel(spec.kernel_size, spec.walk_steps, &mut rng);
            let mut f = convolve_valid(&u0, &k0)?;
            if noise_sigma > 0.0 {
                let n = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                f.data_mut().iter_mut().for_each(|v| *v += n.sample(&mut rng));
            }
            Ok(TestCase { u0, k0, f, seed: s })
        })
        .collect()
}

const SHIFT: isize = 2;

/// Smallest SSD between `u` shifted by up to ±2 pixels and `u0`, over the interior that
/// excludes the kernel margin and the shift range.
pub fn aligned_interior_ssd(u: &Image, u0: &Image, margin: usize) -> Result<f64> {
    if !u.same_shape(u0) {
        return Err(Error::Dimension("estimate and ground truth differ in size".into()));
    }
    let m = margin + SHIFT as usize;
    let (w, h) = (u0.width(), u0.height());
    if w <= 2 * m || h <= 2 * m {
        return Err(Error::Dimension("image too small for the comparison interior".into()));
    }
    let mut best = f64::INFINITY;
    for dy in -SHIFT..=SHIFT {
        for dx in -SHIFT..=SHIFT {
            let mut ssd = 0.0;
            for c in 0..u0.channels() {
                let (a, b) = (u.plane(c), u0.plane(c));
                for y in m..h - m {
                    let ys = (y as isize + dy) as usize;
                    for x in m..w - m {
                        let xs = (x as isize + dx) as usize;
                        let d = a[ys * w + xs] - b[y * w + x];
                        ssd += d * d;
                    }
                }
            }
            best = best.min(ssd);
        }
    }
    Ok(best)
}

/// Max-abs kernel difference minimized over shifts of up to ±2 pixels.
pub fn aligned_kernel_error(k: &Kernel, k0: &Kernel) -> f64 {
    let w = k.width().max(k0.width()) + 2 * SHIFT as usize;
    let h = k.height().max(k0.height()) + 2 * SHIFT as usize;
    let reference = k0.shifted_into(w, h, 0, 0);
    let mut best = f64::INFINITY;
    for dy in -SHIFT..=SHIFT {
        for dx in -SHIFT..=SHIFT {
            best = best.min(k.shifted_into(w, h, dx, dy).max_abs_diff(&reference));
        }
    }
    best
}

/// SSD of the non-blind result with `k_est` over that with the true kernel.
pub fn error_ratio(case: &TestCase, k_est: &Kernel, lambda_nb: f64) -> Result<f64> {
    if (k_est.width(), k_est.height()) != (case.k0.width(), case.k0.height()) {
        return Err(Error::Dimension("estimated kernel size differs from the true kernel".into()));
    }
    let margin = case.k0.width().max(case.k0.height()) / 2;
    let est = deblur_nonblind(&case.f, k_est, lambda_nb)?;
    let truth = deblur_nonblind(&case.f, &case.k0, lambda_nb)?;
    let num = aligned_interior_ssd(&est, &case.u0, margin)?;
    let den = aligned_interior_ssd(&truth, &case.u0, margin)?;
    Ok(num / den.max(1e-12))
}

/// Outcome of one blind run inside an ablation.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub case: usize,
    /// `Err` holds the failure message; failures count as ratio = ∞.
    pub ratio: std::result::Result<f64, String>,
    pub kernel_error: Option<f64>,
}

/// Per-configuration results of an ablation.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRatioReport {
    pub mode: BoundaryMode,
    pub filtered: bool,
    pub outcomes: Vec<CaseOutcome>,
}

impl ErrorRatioReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| *o.ratio.as_ref().unwrap_or(&f64::INFINITY)).collect()
    }

    /// Fraction of cases with ratio strictly below `bin`.
    pub fn fraction_below(&self, bin: f64) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        self.ratios().iter().filter(|&&r| r < bin).count() as f64 / self.outcomes.len() as f64
    }

    /// Entry `i` is the fraction of cases with ratio below `i + 1`, for bins `1..=max_bin`.
    pub fn cumulative_histogram(&self, max_bin: usize) -> Vec<f64> {
        (1..=max_bin).map(|i| self.fraction_below(i as f64)).collect()
    }

    /// Smallest bin at which every successful case is counted.
    pub fn covering_bin(&self) -> usize {
        self.ratios().iter().filter(|r| r.is_finite()).fold(1.0f64, |m, &r| m.max(r.floor() + 1.0)) as usize
    }
}

/// Runs blind deconvolution on every case for each boundary mode, then scores the
/// estimated kernel with the free-boundary non-blind solver. Cases run in parallel;
/// results are ordered by case index.
pub fn run_ablation(
    cases: &[TestCase],
    modes: &[BoundaryMode],
    filtered: bool,
    base: &DeblurConfig,
    lambda_nb: f64,
) -> Result<Vec<ErrorRatioReport>> {
    if cases.is_empty() {
        return Err(Error::InvalidArgument("ablation needs at least one case".into()));
    }
    Ok(modes
        .iter()
        .map(|&mode| {
            let outcomes = cases
                .par_iter()
                .enumerate()
                .map(|(i, case)| {
                    let cfg = DeblurConfig {
                        boundary: mode,
                        filtered_kernel_estimation: filtered,
                        ..base.clone().with_kernel_size(case.k0.width(), case.k0.height())
                    };
                    match deblur_blind(&case.f, &cfg) {
                        Ok(res) => CaseOutcome {
                            case: i,
                            ratio: error_ratio(case, &res.k, lambda_nb).map_err(|e| e.to_string()),
                            kernel_error: Some(aligned_kernel_error(&res.k, &case.k0)),
                        },
                        Err(e) => CaseOutcome { case: i, ratio: Err(e.to_string()), kernel_error: None },
                    }
                })
                .collect();
            ErrorRatioReport { mode, filtered, outcomes }
        })
        .collect())
}

/// Rows `case,mode,filtered,ratio` (failures written as `inf`).
pub fn report_rows(reports: &[ErrorRatioReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.outcomes.iter().map(move |o| {
                vec![
                    o.case.to_string(),
                    r.mode.name().to_string(),
                    r.filtered.to_string(),
                    o.ratio.as_ref().map(|v| v.to_string()).unwrap_or_else(|_| "inf".into()),
                ]
            })
        })
        .collect()
}

/// Rows `mode,filtered,bin,fraction` for bins `1..=max_bin`.
pub fn histogram_rows(reports: &[ErrorRatioReport], max_bin: usize) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.cumulative_histogram(max_bin).into_iter().enumerate().map(move |(i, v)| {
                vec![r.mode.name().to_string(), r.filtered.to_string(), (i + 1).to_string(), v.to_string()]
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deblur::model_energy;
    use crate::deblur::GradientModel;

    #[test]
    fn cases_are_deterministic_and_exact() {
        let a = make_cases(3, 7, 0.0).unwrap();
        let b = make_cases(3, 7, 0.0).unwrap();
        assert_eq!(a, b);
        for c in &a {
            assert!(c.k0.is_feasible(1e-12));
            assert_eq!(c.f, convolve_valid(&c.u0, &c.k0).unwrap());
            let e = model_energy(&c.u0, &c.f, &c.k0, 0.0, &GradientModel::default()).unwrap();
            assert_eq!(e, 0.0);
        }
        assert_ne!(make_cases(1, 8, 0.0).unwrap()[0], a[0]);
    }

    #[test]
    fn noise_is_seeded() {
        let a = make_cases(2, 3, 0.01).unwrap();
        assert_eq!(a, make_cases(2, 3, 0.01).unwrap());
        assert_ne!(a[0].f, convolve_valid(&a[0].u0, &a[0].k0).unwrap());
    }

    #[test]
    fn kernel_alignment_ignores_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k = random_walk_kernel(5, 15, &mut rng);
        let big = k.shifted_into(9, 9, 1, -1);
        assert!(aligned_kernel_error(&big, &k) < 1e-15);
        assert!(aligned_kernel_error(&Kernel::delta(5, 5).unwrap(), &k) > 0.0);
    }

    #[test]
    fn histogram_bins() {
        let mk = |rs: &[f64]| ErrorRatioReport {
            mode: BoundaryMode::ValidFree,
            filtered: false,
            outcomes: rs.iter().enumerate().map(|(i, &r)| CaseOutcome { case: i, ratio: Ok(r), kernel_error: None }).collect(),
        };
        let r = mk(&[1.0, 1.5, 2.9, 3.0, 7.2]);
        assert_eq!(r.cumulative_histogram(4), vec![0.0, 0.4, 0.6, 0.8]);
        assert_eq!(r.covering_bin(), 8);
        assert_eq!(*r.cumulative_histogram(8).last().unwrap(), 1.0);
    }
}
