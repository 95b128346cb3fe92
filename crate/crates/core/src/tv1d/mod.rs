//! Exact 1D total-variation tools for step signals blurred by 3-tap kernels.
//!
//! Index conventions: a [`StepSignal`] lives on `x ∈ [−L1, L2]` (length `L1+L2+1`), its
//! blurred version from [`blur_step`] on `x ∈ [−L1+1, L2−1]`, and the derivative of the
//! blurred signal on `x ∈ [−L1+1, L2−2]`.

mod closed_form;
mod filtered;
mod taut_string;

pub use closed_form::{closed_form_denoise, lambda_intervals, ClosedForm, DenoiseCase, Interval, LambdaIntervals};
pub use filtered::{degenerate_region, filtered_spike, soft_threshold_denoise, step_derivative, FilteredSpike};
pub use taut_string::{extend_replicate, taut_string_denoise, tv_denoise, tv_energy};

use crate::error::{Error, Result};
use crate::image::Kernel;

/// Two-level step: `U1` for `x < 0`, `U2` for `x ≥ 0`, on `x ∈ [−L1, L2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSignal {
    pub u1: f64,
    pub u2: f64,
    pub l1: usize,
    pub l2: usize,
}

impl StepSignal {
    pub fn new(u1: f64, u2: f64, l1: usize, l2: usize) -> Result<Self> {
        if !(u1.is_finite() && u2.is_finite()) || u1 >= u2 {
            return Err(Error::InvalidArgument(format!("step needs finite U1 < U2, got {u1}, {u2}")));
        }
        if l1 <= 2 || l2 <= 2 {
            return Err(Error::InvalidArgument(format!("step needs L1, L2 > 2, got {l1}, {l2}")));
        }
        Ok(Self { u1, u2, l1, l2 })
    }

    pub fn height(&self) -> f64 {
        self.u2 - self.u1
    }

    pub fn len(&self) -> usize {
        self.l1 + self.l2 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Array index of coordinate `x` in the full-domain signal.
    pub fn index(&self, x: isize) -> usize {
        (x + self.l1 as isize) as usize
    }

    /// The sharp signal on `[−L1, L2]`.
    pub fn sharp(&self) -> Vec<f64> {
        (-(self.l1 as isize)..=self.l2 as isize).map(|x| if x < 0 { self.u1 } else { self.u2 }).collect()
    }

    /// Same signal shifted so that it has zero mean over `[−L1+1, L2−1]`, the support
    /// of its blurred observation.
    pub fn zero_mean(&self) -> Self {
        let n = (self.l1 + self.l2 - 1) as f64;
        let m = (self.u1 * (self.l1 - 1) as f64 + self.u2 * self.l2 as f64) / n;
        Self { u1: self.u1 - m, u2: self.u2 - m, ..*self }
    }
}

/// 3-tap blur `k[−1] = δ2, k[0] = 1−δ1−δ2, k[1] = δ1`, acting as
/// `f[x] = δ2·u[x−1] + (1−δ1−δ2)·u[x] + δ1·u[x+1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Blur3 {
    pub delta1: f64,
    pub delta2: f64,
}

impl Blur3 {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self> {
        if !(delta1 >= 0.0 && delta2 >= 0.0 && delta1 + delta2 <= 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("blur ({delta1}, {delta2}) is outside the simplex")));
        }
        Ok(Self { delta1, delta2 })
    }

    pub fn center(&self) -> f64 {
        1.0 - self.delta1 - self.delta2
    }

    /// Taps in window order `[k[−1], k[0], k[1]]`.
    pub fn taps(&self) -> [f64; 3] {
        [self.delta2, self.center(), self.delta1]
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::from_raw(3, 1, self.taps().to_vec())
    }

    /// Reads (δ1, δ2) back from a 1×3 kernel.
    pub fn from_kernel(k: &Kernel) -> Result<Self> {
        if k.width() != 3 || k.height() != 1 {
            return Err(Error::Dimension("expected a 1x3 kernel".into()));
        }
        Ok(Self { delta1: k.data()[2], delta2: k.data()[0] })
    }
}

/// Blurred step on `[−L1+1, L2−1]`: `U1` left of `−1`, `U2` right of `0`, and the two
/// transition samples `f[−1] = U1 + δ1(U2−U1)`, `f[0] = U2 − δ2(U2−U1)`.
pub fn blur_step(s: &StepSignal, b: &Blur3) -> Vec<f64> {
    let d = s.height();
    (-(s.l1 as isize) + 1..=s.l2 as isize - 1)
        .map(|x| match x {
            -1 => s.u1 + b.delta1 * d,
            0 => s.u2 - b.delta2 * d,
            x if x < 0 => s.u1,
            _ => s.u2,
        })
        .collect()
}
