use super::{Blur3, StepSignal};

/// Forward difference of the blurred step, on `x ∈ [−L1+1, L2−2]`.
pub fn step_derivative(s: &StepSignal, b: &Blur3) -> Vec<f64> {
    let f = super::blur_step(s, b);
    f.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Elementwise `sign(v)·max(|v| − λ, 0)`: the exact solution of TV denoising in the
/// derivative domain (an ℓ1-penalized identity problem).
pub fn soft_threshold_denoise(fx: &[f64], lambda: f64) -> Vec<f64> {
    fx.iter().map(|&v| v.signum() * (v.abs() - lambda).max(0.0)).collect()
}

/// A single-spike (sharp) outcome of derivative-domain denoising.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilteredSpike {
    /// Coordinate of the surviving derivative sample (−2, −1 or 0).
    pub position: isize,
    /// Smallest λ that removes the other two transition samples.
    pub lambda_min: f64,
    /// Spike height at `lambda_min`.
    pub height_at_min: f64,
}

/// Which transition sample survives soft-thresholding alone, if any.
pub fn filtered_spike(s: &StepSignal, b: &Blur3) -> Option<FilteredSpike> {
    let d = s.height();
    let (d1, d2, c) = (b.delta1, b.delta2, b.center());
    let spike = |position, keep: f64, others: f64| FilteredSpike {
        position,
        lambda_min: others * d,
        height_at_min: (keep - others) * d,
    };
    if d1 > d2.max((1.0 - d2) / 2.0) {
        Some(spike(-2, d1, d2.max(c)))
    } else if 1.0 > (2.0 * d1 + d2).max(2.0 * d2 + d1) {
        Some(spike(-1, c, d1.max(d2)))
    } else if d2 > d1.max((1.0 - d1) / 2.0) {
        Some(spike(0, d2, d1.max(c)))
    } else {
        None
    }
}

/// Blur configurations that never yield a sharp two-level (or single-spike) solution.
///
/// Unfiltered: on either of the two lines where the λ intervals collapse.
/// Filtered: where two of the three transition samples tie for largest.
pub fn degenerate_region(b: &Blur3, s: &StepSignal, filtered: bool) -> bool {
    const TOL: f64 = 1e-9;
    let (d1, d2) = (b.delta1, b.delta2);
    if filtered {
        let third = 1.0 / 3.0 - TOL;
        ((d2 - d1).abs() <= TOL && d1 >= third)
            || ((d1 - (1.0 - d2) / 2.0).abs() <= TOL && d1 >= third)
            || ((d2 - (1.0 - d1) / 2.0).abs() <= TOL && d2 >= third)
    } else {
        let (l1, l2) = (s.l1 as f64, s.l2 as f64);
        (d2 - (l1 - d1 - 1.0) / (l1 + l2 - 2.0)).abs() <= TOL || (d2 - (l2 - (l1 + l2 - 2.0) * d1)).abs() <= TOL
    }
}
