use proptest::prelude::*;

use tvbd::alternating::{least_squares_kernel, pam_k_step, project_simplex};
use tvbd::conv::{convolve_full, convolve_valid};
use tvbd::deblur::project_kernel;
use tvbd::diff::grad_lp_norm;
use tvbd::eval::{CaseOutcome, ErrorRatioReport};
use tvbd::tv1d::{
    blur_step, closed_form_denoise, lambda_intervals, soft_threshold_denoise, taut_string_denoise, tv_denoise, Blur3, StepSignal,
};
use tvbd::{BoundaryMode, Image, Kernel};

fn image(w: usize, h: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(-1.0f64..1.0, w * h).prop_map(move |d| Image::new(w, h, 1, d).unwrap())
}

fn sized_image() -> impl Strategy<Value = Image> {
    (5usize..12, 5usize..12).prop_flat_map(|(w, h)| image(w, h))
}

fn kernel() -> impl Strategy<Value = Kernel> {
    (prop_oneof![Just(1usize), Just(3), Just(5)], prop_oneof![Just(1usize), Just(3)])
        .prop_flat_map(|(w, h)| prop::collection::vec(0.0f64..1.0, w * h).prop_map(move |d| (w, h, d)))
        .prop_filter("nonzero mass", |(_, _, d)| d.iter().sum::<f64>() > 1e-3)
        .prop_map(|(w, h, d)| {
            let s: f64 = d.iter().sum();
            Kernel::new(w, h, d.iter().map(|v| v / s).collect()).unwrap()
        })
}

fn step_and_blur() -> impl Strategy<Value = (StepSignal, Blur3)> {
    (-2.0f64..1.0, 0.1f64..3.0, 3usize..15, 3usize..15, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(u1, h, l1, l2, a, b)| {
        let d1 = a;
        let d2 = b * (1.0 - d1);
        (StepSignal::new(u1, u1 + h, l1, l2).unwrap(), Blur3::new(d1, d2).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_valid_is_central_crop(u in sized_image()) {
        let k = Kernel::delta(3, 3).unwrap();
        prop_assert_eq!(convolve_valid(&u, &k).unwrap(), u.crop_border(1, 1).unwrap());
    }

    #[test]
    fn full_is_adjoint_of_valid(u in image(9, 7), v in image(7, 7), k in prop::collection::vec(-1.0f64..1.0, 3)) {
        let k = Kernel::new(3, 1, k).unwrap();
        let lhs = convolve_valid(&u, &k).unwrap().dot(&v);
        let rhs = u.dot(&convolve_full(&v, &k));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn valid_is_linear(u in image(8, 8), v in image(8, 8), a in -2.0f64..2.0, b in -2.0f64..2.0, k in kernel()) {
        let mut w = u.scale(a);
        w.axpy(b, &v);
        let lhs = convolve_valid(&w, &k).unwrap();
        let mut rhs = convolve_valid(&u, &k).unwrap().scale(a);
        rhs.axpy(b, &convolve_valid(&v, &k).unwrap());
        let scale = 1.0 + lhs.max_abs().max(rhs.max_abs());
        prop_assert!(lhs.sub(&rhs).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn blurring_never_increases_gradient_norm(u in sized_image(), k in kernel(), p2 in any::<bool>()) {
        let p = if p2 { 2.0 } else { 1.0 };
        let f = convolve_valid(&u, &k).unwrap();
        prop_assert!(grad_lp_norm(&f, p).unwrap() <= grad_lp_norm(&u, p).unwrap() + 1e-9);
    }

    #[test]
    fn projections_are_feasible(d in prop::collection::vec(-1.0f64..1.0, 9)) {
        let k = Kernel::new(3, 3, d.clone()).unwrap();
        if let Ok(p) = project_kernel(&k) {
            prop_assert!(p.is_feasible(1e-12));
        } else {
            prop_assert!(d.iter().all(|&v| v <= 0.0) || d.iter().map(|v| v.max(0.0)).sum::<f64>() <= 1e-12);
        }
        let s = project_simplex(&d);
        prop_assert!(s.iter().all(|&v| v >= 0.0));
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feasible_kernel_projects_to_itself(k in kernel()) {
        prop_assert!(project_kernel(&k).unwrap().max_abs_diff(&k) < 1e-15);
    }

    #[test]
    fn tv_denoise_preserves_mean(f in prop::collection::vec(-1.0f64..1.0, 2..40), lambda in 0.0f64..2.0) {
        let u = tv_denoise(&f, lambda).unwrap();
        let n = f.len() as f64;
        prop_assert!((u.iter().sum::<f64>() / n - f.iter().sum::<f64>() / n).abs() < 1e-10);
        let ext = taut_string_denoise(&f, lambda).unwrap();
        prop_assert_eq!(&ext[1..ext.len() - 1], &u[..]);
    }

    #[test]
    fn tv_denoise_is_nonexpansive(
        f in prop::collection::vec(-1.0f64..1.0, 2..30),
        noise in prop::collection::vec(-0.3f64..0.3, 30),
        lambda in 0.0f64..1.0,
    ) {
        let g: Vec<f64> = f.iter().zip(&noise).map(|(a, b)| a + b).collect();
        let uf = tv_denoise(&f, lambda).unwrap();
        let ug = tv_denoise(&g, lambda).unwrap();
        let din = f.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dout = uf.iter().zip(&ug).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(dout <= din + 1e-10);
    }

    #[test]
    fn soft_threshold_shrinks(f in prop::collection::vec(-2.0f64..2.0, 1..30), lambda in 0.0f64..1.0) {
        let out = soft_threshold_denoise(&f, lambda);
        for (o, i) in out.iter().zip(&f) {
            prop_assert!(o.abs() <= (i.abs() - lambda).max(0.0) + 1e-12);
            if *o != 0.0 {
                prop_assert_eq!(o.signum(), i.signum());
            }
        }
    }

    #[test]
    fn closed_form_matches_taut_string((s, b) in step_and_blur(), t in 0.02f64..0.98) {
        let iv = lambda_intervals(&s, &b);
        for (_, i) in iv.non_empty() {
            let lambda = i.min + t * (i.max - i.min);
            let cf = closed_form_denoise(&s, &b, lambda);
            let ts = taut_string_denoise(&blur_step(&s, &b), lambda).unwrap();
            let sig = cf.signal.unwrap();
            for (a, c) in sig.iter().zip(&ts) {
                prop_assert!((a - c).abs() < 1e-8, "{:?} vs {:?}", sig, ts);
            }
        }
    }

    #[test]
    fn scaled_sharp_signal_gives_scaled_fit((s, b) in step_and_blur(), a in 0.2f64..5.0) {
        let u0 = s.sharp();
        let f = Image::from_signal(&blur_step(&s, &b));
        let ua = Image::from_signal(&u0.iter().map(|v| a * v).collect::<Vec<_>>());
        let ls = least_squares_kernel(&f, &ua).unwrap();
        for (x, t) in ls.data().iter().zip(b.taps()) {
            prop_assert!((x - t / a).abs() < 1e-8 * (1.0 + 1.0 / a), "{:?} {:?}", ls.data(), b.taps());
        }
        let k = pam_k_step(&f, &ua).unwrap();
        prop_assert!(k.is_feasible(1e-12));
        for (x, t) in k.data().iter().zip(b.taps()) {
            prop_assert!((x - t).abs() < 1e-8);
        }
    }

    #[test]
    fn pam_k_step_is_always_feasible(f in prop::collection::vec(-1.0f64..1.0, 12), u in prop::collection::vec(-1.0f64..1.0, 14)) {
        if let Ok(k) = pam_k_step(&Image::from_signal(&f), &Image::from_signal(&u)) {
            prop_assert!(k.is_feasible(1e-12));
        }
    }

    #[test]
    fn cumulative_histogram_is_monotone(r in prop::collection::vec(prop_oneof![0.0f64..12.0, Just(f64::INFINITY)], 1..30)) {
        let rep = ErrorRatioReport {
            mode: BoundaryMode::ValidFree,
            filtered: false,
            outcomes: r.iter().enumerate().map(|(i, &v)| CaseOutcome {
                case: i,
                ratio: if v.is_finite() { Ok(v) } else { Err("failed".into()) },
                kernel_error: None,
            }).collect(),
        };
        let h = rep.cumulative_histogram(15);
        prop_assert!(h.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(h.iter().all(|&v| (0.0..=1.0).contains(&v)));
        if r.iter().all(|v| v.is_finite()) {
            let top = rep.cumulative_histogram(rep.covering_bin());
            prop_assert_eq!(*top.last().unwrap(), 1.0);
        }
    }
}
