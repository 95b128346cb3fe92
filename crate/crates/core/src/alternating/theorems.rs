use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{am_k_step, am_u_step, least_squares_kernel, pam_k_step};
use crate::conv::convolve_valid;
use crate::error::{Error, Result};
use crate::image::{Image, Kernel};
use crate::io::write_table_csv;
use crate::tv1d::{blur_step, degenerate_region, lambda_intervals, taut_string_denoise, Blur3, DenoiseCase, StepSignal};

/// A blurred-step instance with λ inside one of its two-level intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInstance {
    pub step: StepSignal,
    pub blur: Blur3,
    pub lambda: f64,
    pub case: DenoiseCase,
}

/// Draws `count` instances with random levels, lengths in `3..15`, a uniformly random
/// non-degenerate blur and λ strictly inside a random non-empty interval.
pub fn sample_instances(count: usize, seed: u64) -> Vec<StepInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u1 = rng.random_range(-2.0..1.0);
        let u2 = u1 + rng.random_range(0.1..3.0);
        let step = StepSignal::new(u1, u2, rng.random_range(3..15), rng.random_range(3..15)).expect("valid step");
        let d1: f64 = rng.random_range(0.0..1.0);
        let d2 = rng.random_range(0.0..1.0) * (1.0 - d1);
        let blur = Blur3::new(d1, d2).expect("on simplex");
        if degenerate_region(&blur, &step, false) {
            continue;
        }
        let ne = lambda_intervals(&step, &blur).non_empty();
        if ne.is_empty() {
            continue;
        }
        let (case, iv) = ne[rng.random_range(0..ne.len())];
        let lambda = iv.min + rng.random_range(0.02..0.98) * iv.width();
        out.push(StepInstance { step, blur, lambda, case });
    }
    out
}

/// One machine-readable verification line.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationRow {
    pub case: DenoiseCase,
    pub lambda: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub l1: usize,
    pub l2: usize,
    pub shift: isize,
    pub kernel_error: f64,
    pub pass: bool,
}

impl VerificationRow {
    pub const HEADER: [&'static str; 9] = ["case", "lambda", "delta1", "delta2", "L1", "L2", "shift", "kernel_error", "pass"];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.case.name().to_string(),
            format!("{}", self.lambda),
            format!("{}", self.delta1),
            format!("{}", self.delta2),
            self.l1.to_string(),
            self.l2.to_string(),
            self.shift.to_string(),
            format!("{:e}", self.kernel_error),
            self.pass.to_string(),
        ]
    }
}

pub fn write_report_csv(path: impl AsRef<Path>, rows: &[VerificationRow]) -> Result<()> {
    write_table_csv(path, &VerificationRow::HEADER, rows.iter().map(|r| r.fields()))
}

fn case_for(step: &StepSignal, blur: &Blur3, lambda: f64) -> Result<DenoiseCase> {
    lambda_intervals(step, blur)
        .non_empty()
        .into_iter()
        .find(|(_, iv)| iv.contains(lambda))
        .map(|(c, _)| c)
        .ok_or_else(|| Error::InvalidArgument(format!("lambda {lambda} is outside every two-level interval")))
}

fn taps3(k: &Kernel) -> [f64; 3] {
    [k.data()[0], k.data()[1], k.data()[2]]
}

/// Outcome of running AM on a blurred step from the no-blur start.
#[derive(Clone, Debug)]
pub struct Theorem3Report {
    pub instance: StepInstance,
    /// Denoised signal from the first `u` step.
    pub u_hat: Vec<f64>,
    /// Kernel after one `u` step and one `k` step.
    pub kernel: [f64; 3],
    /// Kernel once AM stops moving.
    pub fixed_point_kernel: [f64; 3],
    pub fixed_point_iterations: usize,
    /// Offset of the kernel's peak from the center.
    pub shift: isize,
    /// Max-abs distance of the two-step kernel from a delta at `shift`.
    pub kernel_error: f64,
    /// `‖δ∘û − f‖²` and `‖k₀∘û − f‖²`.
    pub cost_delta: f64,
    pub cost_true: f64,
    pub pass: bool,
}

impl Theorem3Report {
    pub fn row(&self) -> VerificationRow {
        row(&self.instance, self.shift, self.kernel_error, self.pass)
    }
}

fn row(i: &StepInstance, shift: isize, kernel_error: f64, pass: bool) -> VerificationRow {
    VerificationRow {
        case: i.case,
        lambda: i.lambda,
        delta1: i.blur.delta1,
        delta2: i.blur.delta2,
        l1: i.step.l1,
        l2: i.step.l2,
        shift,
        kernel_error,
        pass,
    }
}

/// AM from `(f, δ)`: the denoised `û`, then the simplex-constrained kernel fit.
/// Also iterates AM to a fixed point.
pub fn verify_theorem3(step: &StepSignal, blur: &Blur3, lambda: f64) -> Result<Theorem3Report> {
    let case = case_for(step, blur, lambda)?;
    let f = Image::from_signal(&blur_step(step, blur));
    let delta = Kernel::delta(3, 1)?;
    let u_hat = am_u_step(&f, &delta, lambda)?;
    let k = am_k_step(&f, &u_hat)?;
    let kernel = taps3(&k);

    let peak = (0..3).max_by(|&a, &b| kernel[a].total_cmp(&kernel[b])).unwrap_or(1);
    let kernel_error = (0..3).map(|i| (kernel[i] - if i == peak { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);

    let cost = |k: &Kernel| -> Result<f64> { Ok(convolve_valid(&u_hat, k)?.sub(&f).sq_norm()) };
    let cost_delta = cost(&delta)?;
    let cost_true = cost(&blur.kernel())?;

    let mut kf = k.clone();
    let mut iters = 1;
    while iters < 200 {
        let u = am_u_step(&f, &kf, lambda)?;
        let next = am_k_step(&f, &u)?;
        let moved = next.max_abs_diff(&kf);
        kf = next;
        iters += 1;
        if moved < 1e-10 {
            break;
        }
    }

    Ok(Theorem3Report {
        instance: StepInstance { step: *step, blur: *blur, lambda, case },
        u_hat: u_hat.into_data(),
        kernel,
        fixed_point_kernel: taps3(&kf),
        fixed_point_iterations: iters,
        shift: peak as isize - 1,
        kernel_error,
        cost_delta,
        cost_true,
        pass: kernel_error < 1e-6,
    })
}

impl fmt::Display for Theorem3Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = &self.instance;
        writeln!(
            f,
            "AM on step (U1={}, U2={}, L1={}, L2={}), blur (d1={}, d2={}), lambda={} [{} case]",
            i.step.u1, i.step.u2, i.step.l1, i.step.l2, i.blur.delta1, i.blur.delta2, i.lambda, i.case.name()
        )?;
        writeln!(f, "  two-step kernel   {:?}  (peak shift {}, error vs delta {:.3e})", self.kernel, self.shift, self.kernel_error)?;
        writeln!(f, "  fixed-point kernel {:?} after {} iterations", self.fixed_point_kernel, self.fixed_point_iterations)?;
        writeln!(f, "  data cost: delta {:.6e}, true blur {:.6e}", self.cost_delta, self.cost_true)?;
        write!(f, "  {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Outcome of one PAM iteration on a zero-mean blurred step from the no-blur start.
#[derive(Clone, Debug)]
pub struct Theorem4Report {
    pub instance: StepInstance,
    /// The zero-mean step actually blurred.
    pub zero_mean_step: StepSignal,
    pub u_hat: Vec<f64>,
    /// Least-squares kernel before projection.
    pub unconstrained: [f64; 3],
    /// Kernel after clamp and normalization.
    pub kernel: [f64; 3],
    /// Best alignment of the true blur against the estimate, in {−1, 0, 1}.
    pub shift: isize,
    pub kernel_error: f64,
    pub pass: bool,
}

impl Theorem4Report {
    pub fn row(&self) -> VerificationRow {
        row(&self.instance, self.shift, self.kernel_error, self.pass)
    }
}

/// Max-abs difference between `k` and `k0` shifted by `s` samples, over a 5-wide canvas.
fn shifted_error(k: &Kernel, k0: &Kernel, s: isize) -> f64 {
    let a = k.shifted_into(5, 1, 0, 0);
    let b = k0.shifted_into(5, 1, s, 0);
    a.max_abs_diff(&b)
}

/// PAM from `(f, δ)` on the zero-mean version of `step`: exact TV denoising, then the
/// unconstrained kernel fit, clamp and normalization.
pub fn verify_theorem4(step: &StepSignal, blur: &Blur3, lambda: f64) -> Result<Theorem4Report> {
    let zm = step.zero_mean();
    let case = case_for(&zm, blur, lambda)?;
    let f = Image::from_signal(&blur_step(&zm, blur));
    let u_hat = Image::from_signal(&taut_string_denoise(f.data(), lambda)?);
    let ls = least_squares_kernel(&f, &u_hat)?;
    let k = pam_k_step(&f, &u_hat)?;
    let k0 = blur.kernel();
    let (shift, kernel_error) = [0isize, -1, 1]
        .into_iter()
        .map(|s| (s, shifted_error(&k, &k0, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three shifts");
    Ok(Theorem4Report {
        instance: StepInstance { step: *step, blur: *blur, lambda, case },
        zero_mean_step: zm,
        u_hat: u_hat.into_data(),
        unconstrained: taps3(&ls),
        kernel: taps3(&k),
        shift,
        kernel_error,
        pass: kernel_error < 1e-6,
    })
}

impl fmt::Display for Theorem4Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = &self.instance;
        writeln!(
            f,
            "PAM on zero-mean step (U1={:.6}, U2={:.6}, L1={}, L2={}), blur (d1={}, d2={}), lambda={} [{} case]",
            self.zero_mean_step.u1,
            self.zero_mean_step.u2,
            i.step.l1,
            i.step.l2,
            i.blur.delta1,
            i.blur.delta2,
            i.lambda,
            i.case.name()
        )?;
        writeln!(f, "  unconstrained fit {:?}", self.unconstrained)?;
        writeln!(f, "  projected kernel  {:?}  true {:?}", self.kernel, i.blur.taps())?;
        writeln!(f, "  best shift {}, max-abs error {:.3e}", self.shift, self.kernel_error)?;
        write!(f, "  {}", if self.pass { "PASS" } else { "FAIL" })
    }
}
