use super::{Blur3, StepSignal};

/// Half-open interval `[min, max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v < self.max
    }
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// The λ ranges for which TV denoising of a blurred step returns a two-level signal.
/// `None` marks an empty range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaIntervals {
    pub left: Option<Interval>,
    pub center: Option<Interval>,
    pub right: Option<Interval>,
}

impl LambdaIntervals {
    pub fn all(&self) -> [(DenoiseCase, Option<Interval>); 3] {
        [(DenoiseCase::Left, self.left), (DenoiseCase::Center, self.center), (DenoiseCase::Right, self.right)]
    }

    pub fn non_empty(&self) -> Vec<(DenoiseCase, Interval)> {
        self.all().into_iter().filter_map(|(c, i)| i.map(|i| (c, i))).collect()
    }

    pub fn get(&self, case: DenoiseCase) -> Option<Interval> {
        match case {
            DenoiseCase::Left => self.left,
            DenoiseCase::Center => self.center,
            DenoiseCase::Right => self.right,
            DenoiseCase::None => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DenoiseCase {
    Left,
    Center,
    Right,
    None,
}

impl DenoiseCase {
    /// First coordinate carrying the upper level.
    pub fn jump(self) -> Option<isize> {
        match self {
            DenoiseCase::Left => Some(-1),
            DenoiseCase::Center => Some(0),
            DenoiseCase::Right => Some(1),
            DenoiseCase::None => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DenoiseCase::Left => "left",
            DenoiseCase::Center => "center",
            DenoiseCase::Right => "right",
            DenoiseCase::None => "none",
        }
    }
}

// Endpoints coinciding up to rounding count as an empty interval; on the degenerate
// lines the two formulas agree exactly in exact arithmetic.
fn interval(min: f64, max: f64, scale: f64) -> Option<Interval> {
    (max - min > 1e-12 * scale).then_some(Interval { min, max })
}

/// Evaluates the six interval endpoints, each scaled by `U2 − U1`.
pub fn lambda_intervals(s: &StepSignal, b: &Blur3) -> LambdaIntervals {
    let d = s.height();
    let (l1, l2) = (s.l1 as f64, s.l2 as f64);
    let (d1, d2) = (b.delta1, b.delta2);
    let scale = d.abs().max(1.0) * (l1 + l2);

    let left = interval(d * (l2 - l2 * d1 - d2), d * (l1 - 2.0) / (l1 + l2 - 1.0) * (l2 + d1 - d2), scale);
    let center = interval(
        d * ((l1 - 2.0) * d1).max((l2 - 1.0) * d2),
        d * (l2 * (l1 - 1.0) - l2 * d1 - (l1 - 1.0) * d2) / (l1 + l2 - 1.0),
        scale,
    );
    let right = interval(
        d * (l1 - d1 - (l1 - 1.0) * d2 - 1.0),
        d * (l2 - 1.0) / (l1 + l2 - 1.0) * (l1 - d1 + d2 - 1.0),
        scale,
    );
    LambdaIntervals { left, center, right }
}

/// Closed-form TV denoising of a blurred step.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub case: DenoiseCase,
    /// Lower and upper levels (Û1, Û2).
    pub levels: Option<(f64, f64)>,
    /// Two-level signal on `[−L1, L2]`.
    pub signal: Option<Vec<f64>>,
}

/// Returns the two-level solution when λ lies in one of the intervals of
/// [`lambda_intervals`], otherwise `case = None`.
pub fn closed_form_denoise(s: &StepSignal, b: &Blur3, lambda: f64) -> ClosedForm {
    let iv = lambda_intervals(s, b);
    let d = s.height();
    let (u1, u2) = (s.u1, s.u2);
    let (l1, l2) = (s.l1 as f64, s.l2 as f64);
    let (d1, d2) = (b.delta1, b.delta2);

    let case = iv
        .all()
        .into_iter()
        .find(|(_, i)| i.is_some_and(|i| i.contains(lambda)))
        .map_or(DenoiseCase::None, |(c, _)| c);

    let levels = match case {
        DenoiseCase::Left => Some((
            u1 + lambda / (l1 - 2.0),
            (u1 + u2 * l2) / (l2 + 1.0) + ((d1 - d2) * d - lambda) / (l2 + 1.0),
        )),
        DenoiseCase::Center => Some((u1 + (d1 * d + lambda) / (l1 - 1.0), u2 - (d2 * d + lambda) / l2)),
        DenoiseCase::Right => Some((
            (u1 * (l1 - 1.0) + u2 + (d1 - d2) * d + lambda) / l1,
            u2 - lambda / (l2 - 1.0),
        )),
        DenoiseCase::None => None,
    };
    let signal = match (levels, case.jump()) {
        (Some((a, c)), Some(j)) => {
            Some((-(s.l1 as isize)..=s.l2 as isize).map(|x| if x < j { a } else { c }).collect())
        }
        _ => None,
    };
    ClosedForm { case, levels, signal }
}

#[cfg(test)]
mod tests {
    use super::super::{blur_step, taut_string_denoise, tv_energy};
    use super::*;

    fn step(u1: f64, u2: f64, l1: usize, l2: usize) -> StepSignal {
        StepSignal::new(u1, u2, l1, l2).unwrap()
    }

    /// Exhaustive minimization over two-level signals on the interior domain with every
    /// possible jump position; levels solved exactly from the 1D convex problem per level
    /// pair by a fine ternary search.
    fn best_two_level(f: &[f64], lambda: f64) -> (f64, Vec<f64>) {
        let n = f.len();
        let mut best = (f64::INFINITY, vec![]);
        for j in 1..n {
            // for fixed jump j with a < c the energy is ½Σ(a−f)² + ½Σ(c−f)² + λ(c − a)
            let ml = f[..j].iter().sum::<f64>() / j as f64;
            let mr = f[j..].iter().sum::<f64>() / (n - j) as f64;
            let a = ml + lambda / j as f64;
            let c = mr - lambda / (n - j) as f64;
            let (a, c) = if a <= c { (a, c) } else {
                let m = f.iter().sum::<f64>() / n as f64;
                (m, m)
            };
            let u: Vec<f64> = (0..n).map(|i| if i < j { a } else { c }).collect();
            let e = tv_energy(&u, f, lambda);
            if e < best.0 {
                best = (e, u);
            }
        }
        best
    }

    #[test]
    fn center_interval_example() {
        let iv = lambda_intervals(&step(0.0, 1.0, 5, 5), &Blur3::new(0.1, 0.1).unwrap());
        let c = iv.center.unwrap();
        assert!((c.min - 0.4).abs() < 1e-15);
        assert!((c.max - 19.1 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn theorem4_instance_interval() {
        let iv = lambda_intervals(&step(-0.5, 0.5, 10, 10), &Blur3::new(0.3, 0.2).unwrap());
        let c = iv.center.unwrap();
        assert!((c.min - 2.4).abs() < 1e-14);
        assert!((c.max - 85.2 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn center_example_levels() {
        let s = step(0.0, 1.0, 5, 5);
        let b = Blur3::new(0.1, 0.1).unwrap();
        let cf = closed_form_denoise(&s, &b, 1.0);
        assert_eq!(cf.case, DenoiseCase::Center);
        let (a, c) = cf.levels.unwrap();
        assert!((a - 0.275).abs() < 1e-15);
        assert!((c - 0.78).abs() < 1e-15);
        let sig = cf.signal.unwrap();
        assert_eq!(sig[s.index(-1)], a);
        assert_eq!(sig[s.index(0)], c);
        let ts = taut_string_denoise(&blur_step(&s, &b), 1.0).unwrap();
        for (x, y) in sig.iter().zip(&ts) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn below_all_intervals_is_none() {
        let s = step(0.0, 1.0, 5, 5);
        let b = Blur3::new(0.1, 0.1).unwrap();
        let iv = lambda_intervals(&s, &b);
        let lowest = iv.non_empty().iter().map(|(_, i)| i.min).fold(f64::INFINITY, f64::min);
        let cf = closed_form_denoise(&s, &b, lowest * 0.5);
        assert_eq!(cf.case, DenoiseCase::None);
        assert!(cf.signal.is_none());
    }

    #[test]
    fn mirror_symmetry_of_side_intervals() {
        let iv = lambda_intervals(&step(0.0, 1.0, 7, 7), &Blur3::new(0.2, 0.2).unwrap());
        let (l, r) = (iv.left, iv.right);
        match (l, r) {
            (Some(l), Some(r)) => assert!((l.width() - r.width()).abs() < 1e-12),
            (None, None) => {}
            _ => panic!("asymmetric emptiness"),
        }
    }

    #[test]
    fn degenerate_lines_empty_everything() {
        for (l1, l2) in [(3usize, 3usize), (5, 7), (15, 24), (10, 10)] {
            let s = step(0.0, 1.0, l1, l2);
            let (fl1, fl2) = (l1 as f64, l2 as f64);
            for i in 1..40 {
                let d1 = i as f64 / 40.0;
                for d2 in [(fl1 - d1 - 1.0) / (fl1 + fl2 - 2.0), fl2 - (fl1 + fl2 - 2.0) * d1] {
                    if d2 < 0.0 || d1 + d2 > 1.0 {
                        continue;
                    }
                    let iv = lambda_intervals(&s, &Blur3::new(d1, d2).unwrap());
                    assert!(iv.non_empty().is_empty(), "L=({l1},{l2}) d=({d1},{d2}) {iv:?}");
                }
            }
        }
    }

    #[test]
    fn levels_agree_with_two_level_exhaustive_search() {
        let cases = [
            (step(0.0, 1.0, 5, 5), Blur3::new(0.1, 0.1).unwrap()),
            (step(-1.0, 0.5, 8, 4), Blur3::new(0.6, 0.1).unwrap()),
            (step(0.2, 2.0, 4, 9), Blur3::new(0.05, 0.7).unwrap()),
            (step(0.0, 1.0, 12, 6), Blur3::new(0.35, 0.25).unwrap()),
        ];
        let mut hits = 0;
        for (s, b) in cases {
            let f = blur_step(&s, &b);
            for (case, iv) in lambda_intervals(&s, &b).non_empty() {
                for t in [0.1, 0.5, 0.9] {
                    let lambda = iv.min + t * iv.width();
                    let cf = closed_form_denoise(&s, &b, lambda);
                    assert_eq!(cf.case, case);
                    let sig = cf.signal.unwrap();
                    let interior = &sig[1..sig.len() - 1];
                    let (_, best) = best_two_level(&f, lambda);
                    for (a, c) in interior.iter().zip(&best) {
                        assert!((a - c).abs() < 1e-10, "{case:?} {a} vs {c}");
                    }
                    hits += 1;
                }
            }
        }
        assert!(hits >= 9);
    }

    #[test]
    fn jump_moves_through_cases() {
        // Sweep λ upward; whenever two consecutive λ fall in different cases the jump
        // location reported by the signal must match the case.
        let s = step(0.0, 1.0, 6, 6);
        for (d1, d2) in [(0.5, 0.1), (0.1, 0.5), (0.3, 0.3), (0.45, 0.05)] {
            let b = Blur3::new(d1, d2).unwrap();
            let mut seen = vec![];
            for i in 0..2000 {
                let lambda = i as f64 * 0.004;
                let cf = closed_form_denoise(&s, &b, lambda);
                if let (Some(sig), Some(j)) = (&cf.signal, cf.case.jump()) {
                    let (a, c) = cf.levels.unwrap();
                    assert!(a < c);
                    let first_high = sig.iter().position(|&v| v == c).unwrap() as isize - s.l1 as isize;
                    assert_eq!(first_high, j);
                    if seen.last() != Some(&cf.case) {
                        seen.push(cf.case);
                    }
                }
            }
            assert!(!seen.is_empty());
        }
    }
}
