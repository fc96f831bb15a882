use cswarp_core::image_ops::composite;
use cswarp_core::kernels::{eval_wendland31, kernel_dalpha, kernel_dr, wendland_via_integral_normalized};
use cswarp_core::*;
use proptest::prelude::*;

fn image(width: usize, height: usize, channels: usize) -> impl Strategy<Value = ImageBuffer> {
    prop::collection::vec(0.0..=1.0f64, width * height * channels)
        .prop_map(move |data| ImageBuffer::new(width, height, channels, data).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wendland_scales_with_alpha(r in 0.0..5.0f64, alpha in 0.05..10.0f64) {
        let scaled = eval_wendland31(r, alpha).unwrap();
        let unit = eval_wendland31(r / alpha, 1.0).unwrap();
        prop_assert!((scaled - unit).abs() <= 1e-14);
    }

    #[test]
    fn wendland_is_bounded_and_decreasing(r in 0.0..2.0f64, dr in 1e-6..0.5f64, alpha in 0.1..4.0f64) {
        let a = eval_wendland31(r, alpha).unwrap();
        let b = eval_wendland31(r + dr, alpha).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn wendland_vanishes_beyond_support(alpha in 0.01..10.0f64, extra in 0.0..100.0f64) {
        prop_assert_eq!(eval_wendland31(alpha + extra, alpha).unwrap(), 0.0);
        prop_assert_eq!(kernel_dr(&KernelSpec::wendland31(alpha).unwrap(), alpha + extra).unwrap(), 0.0);
        prop_assert_eq!(kernel_dalpha(alpha + extra, alpha).unwrap(), 0.0);
    }

    #[test]
    fn integral_construction_matches_closed_form(r in 0.0..1.2f64) {
        let built = wendland_via_integral_normalized(3, 1, r, 2000).unwrap();
        let closed = eval_wendland31(r, 1.0).unwrap();
        prop_assert!((built - closed).abs() < 1e-6, "{} vs {}", built, closed);
    }

    #[test]
    fn derivatives_match_finite_differences(r in 0.01..3.0f64, alpha in 0.2..3.0f64) {
        let h = 1e-6;
        let spec = KernelSpec::wendland31(alpha).unwrap();
        let fd_r = (spec.eval(r + h) - spec.eval(r - h)) / (2.0 * h);
        let fd_a = (eval_wendland31(r, alpha + h).unwrap() - eval_wendland31(r, alpha - h).unwrap()) / (2.0 * h);
        prop_assert!((fd_r - kernel_dr(&spec, r).unwrap()).abs() < 1e-6 * (1.0 + fd_r.abs()) / alpha);
        prop_assert!((fd_a - kernel_dalpha(r, alpha).unwrap()).abs() < 1e-6 * (1.0 + fd_a.abs()) / alpha);
        let fd_tps = (KernelSpec::Tps.eval(r + h) - KernelSpec::Tps.eval(r - h)) / (2.0 * h);
        prop_assert!((fd_tps - kernel_dr(&KernelSpec::Tps, r).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn support_clamp_is_monotone_and_bounded(d in 0.01..10.0f64, lambda in 0.1..20.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let policy = SupportPolicy::new(lambda, d).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (alo, ahi) = (clamp_support(lo, &policy).unwrap(), clamp_support(hi, &policy).unwrap());
        prop_assert!(alo >= d && alo <= ahi && ahi <= lambda + d);
    }

    #[test]
    fn l1_is_a_metric(a in image(6, 5, 3), b in image(6, 5, 3), c in image(6, 5, 3)) {
        let ab = l1_distance(&a, &b).unwrap();
        prop_assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, l1_distance(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(ab <= l1_distance(&a, &c).unwrap() + l1_distance(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn composite_stays_between_inputs(m in image(7, 4, 1), w in image(7, 4, 3), r in image(7, 4, 3)) {
        let mask = Mask::from_image(&m).unwrap();
        let out = composite(&mask, &w, &r).unwrap();
        for ((o, a), b) in out.data().iter().zip(w.data()).zip(r.data()) {
            prop_assert!(*o >= a.min(*b) && *o <= a.max(*b));
        }
    }

    #[test]
    fn ssim_is_symmetric_and_bounded(a in image(16, 14, 1), b in image(16, 14, 1)) {
        let ab = ssim(&a, &b).unwrap();
        prop_assert!((ab - ssim(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delaunay_matches_grid_closed_form(rows in 2usize..8, cols in 2usize..8, w in 8usize..300, h in 8usize..300, normalized in any::<bool>()) {
        let grid = make_grid(rows, cols, Frame::new(w, h, normalized).unwrap()).unwrap();
        let d = delaunay_max_edge(grid.base()).unwrap();
        prop_assert!((d - grid_distance_d(&grid)).abs() < 1e-9 * d.max(1.0));
    }

    #[test]
    fn identity_warp_is_bit_exact(img in image(9, 7, 3), normalized in any::<bool>()) {
        let frame = Frame::new(9, 7, normalized).unwrap();
        let field = DisplacementField::identity(frame);
        prop_assert_eq!(backward_warp(&img, &field, Border::Clamp).unwrap(), img.clone());
        prop_assert_eq!(backward_warp(&img, &field, Border::Zeros).unwrap(), img);
    }
}
