use cswarp_core::registration::{locality_statistic, SyntheticPreset, SyntheticSpec};
use cswarp_core::*;

fn pair(preset: SyntheticPreset, pattern: Pattern, seed: u64) -> (SyntheticSpec, SyntheticPair) {
    let spec = SyntheticSpec::new(128, 96, pattern, preset, seed).unwrap();
    let pair = make_synthetic_pair(&spec).unwrap();
    (spec, pair)
}

fn assert_alpha_never_below_d(r: &RegistrationResult) {
    assert_eq!(r.alpha_curve.len(), r.loss_curve.len());
    for (a, d) in r.alpha_curve.iter().zip(&r.min_alpha_curve) {
        assert!(a >= d, "alpha {a} < D {d}");
    }
}

#[test]
fn identical_images_stay_put() {
    let (_, p) = pair(SyntheticPreset::Identity, Pattern::CheckerBlob, 0);
    let r = register(&p.source, &p.target, &RegistrationConfig::default()).unwrap();
    assert!(r.metrics.l1 <= 1e-3);
    assert!(r.theta.max_abs() <= 0.02);
    assert_alpha_never_below_d(&r);
}

#[test]
fn recovers_a_known_wendland_warp() {
    let (spec, p) = pair(SyntheticPreset::Random { amplitude: 0.08 }, Pattern::CheckerBlob, 11);
    let before = l1_distance(&p.source, &p.target).unwrap();
    let r = register(&p.source, &p.target, &RegistrationConfig::default()).unwrap();
    assert!(r.metrics.l1 <= 0.01, "l1 {} (was {before})", r.metrics.l1);
    assert!(r.metrics.ssim >= 0.95, "ssim {}", r.metrics.ssim);
    assert_alpha_never_below_d(&r);

    // The recovered offsets are close to the generating ones.
    let err = r
        .theta
        .as_slice()
        .iter()
        .zip(spec.theta_star.as_slice())
        .map(|(a, b)| (*a - *b).norm())
        .fold(0.0, f64::max);
    assert!(err < 0.03, "max offset error {err}");

    // Best iterate per level, and the reported metric is the final best.
    let mut start = 0;
    for level in &r.levels {
        let curve = &r.loss_curve[start..start + level.iterations];
        let best = curve.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(best, level.best_l1);
        start += level.iterations;
    }
    assert!((r.levels.last().unwrap().best_l1 - r.metrics.l1).abs() < 1e-12);
}

#[test]
fn frozen_alpha_is_reported_exactly() {
    let (_, p) = pair(SyntheticPreset::Single, Pattern::Checker, 1);
    let cfg = RegistrationConfig {
        optimize_alpha: false,
        alpha_hat_init: 0.3,
        iterations: 20,
        ..RegistrationConfig::default()
    };
    let r = register(&p.source, &p.target, &cfg).unwrap();
    assert_eq!(r.alpha_hat, 0.3);
    assert!(r.alpha_curve.iter().all(|a| *a == r.alpha_curve[0]));
}

#[test]
fn runs_are_bit_identical() {
    let (_, p) = pair(SyntheticPreset::Random { amplitude: 0.05 }, Pattern::CheckerBlob, 2);
    let cfg = RegistrationConfig {
        iterations: 30,
        seed: 5,
        ..RegistrationConfig::default()
    };
    let a = register(&p.source, &p.target, &cfg).unwrap();
    let b = register(&p.source, &p.target, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn wendland_results_never_move_points_outside_the_disks() {
    let (_, p) = pair(SyntheticPreset::Random { amplitude: 0.05 }, Pattern::CheckerBlob, 3);
    let cfg = RegistrationConfig {
        iterations: 25,
        ..RegistrationConfig::default()
    };
    let r = register(&p.source, &p.target, &cfg).unwrap();
    let alpha = r.alpha.unwrap();
    let (stat, probes) = locality_statistic(&r.model().unwrap(), &r.frame, alpha, alpha + r.delaunay_distance);
    assert!(probes > 0);
    assert_eq!(stat, 0.0);
}

#[test]
fn pixel_frame_registration_recovers_too() {
    let (_, p) = pair(SyntheticPreset::Random { amplitude: 0.06 }, Pattern::CheckerBlob, 4);
    let cfg = RegistrationConfig {
        normalized: false,
        ..RegistrationConfig::default()
    };
    let r = register(&p.source, &p.target, &cfg).unwrap();
    assert!(r.metrics.l1 <= 0.01, "l1 {}", r.metrics.l1);
    assert_alpha_never_below_d(&r);
}

#[test]
fn thin_plate_registration_runs() {
    let (_, p) = pair(SyntheticPreset::Random { amplitude: 0.05 }, Pattern::CheckerBlob, 5);
    let before = l1_distance(&p.source, &p.target).unwrap();
    let cfg = RegistrationConfig {
        kernel: KernelFamily::Tps,
        ..RegistrationConfig::default()
    };
    let r = register(&p.source, &p.target, &cfg).unwrap();
    assert!(r.alpha.is_none() && r.alpha_curve.is_empty());
    assert!(r.metrics.l1 < 0.5 * before, "{} vs {before}", r.metrics.l1);
}

#[test]
fn curve_csv_has_one_row_per_iteration() {
    let (_, p) = pair(SyntheticPreset::Identity, Pattern::Checker, 0);
    let cfg = RegistrationConfig {
        iterations: 5,
        levels: 2,
        ..RegistrationConfig::default()
    };
    let r = register(&p.source, &p.target, &cfg).unwrap();
    let csv = r.loss_curve_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iter,loss_true_l1");
    assert_eq!(lines.len(), 1 + 10);
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn rejects_bad_inputs() {
    let small = ImageBuffer::filled(15, 40, 1, 0.5).unwrap();
    assert!(register(&small, &small, &RegistrationConfig::default()).is_err());
    let a = ImageBuffer::filled(40, 40, 1, 0.5).unwrap();
    let b = ImageBuffer::filled(40, 40, 3, 0.5).unwrap();
    assert!(register(&a, &b, &RegistrationConfig::default()).is_err());
}

#[test]
fn single_point_target_differs_only_inside_the_support() {
    let spec = SyntheticSpec::new(128, 96, Pattern::Checker, SyntheticPreset::Single, 8).unwrap();
    let p = make_synthetic_pair(&spec).unwrap();
    let frame = spec.frame().unwrap();
    let grid = make_grid(5, 5, frame).unwrap();
    let alpha = SupportPolicy::for_grid(&grid, spec.lambda_alpha).unwrap().clamp(0.3).unwrap();
    let moved = grid.base()[12];
    let mut changed = 0;
    for y in 0..96 {
        for x in 0..128 {
            if p.source.pixel(x, y) != p.target.pixel(x, y) {
                changed += 1;
                assert!(frame.pixel_center(x, y).distance(moved) < alpha);
            }
        }
    }
    assert!(changed > 0);

    // Solving the interpolation system spreads weight to every center, so
    // the untouched region is the complement of the union of all disks.
    let small = SyntheticSpec { lambda_alpha: 0.5, ..spec };
    let (_, model) = small.truth().build().unwrap();
    let alpha = SupportPolicy::for_grid(&grid, 0.5).unwrap().clamp(0.3).unwrap();
    for p in [Vec2::new(2.0, 0.0), Vec2::new(-1.9, 1.9), Vec2::new(0.0, -2.0)] {
        assert!(grid.base().iter().all(|c| c.distance(p) >= alpha));
        assert_eq!(model.evaluate_point(p), p);
    }
}

#[test]
fn kernel_comparison_shows_locality_contrast() {
    let (_, p) = pair(SyntheticPreset::Single, Pattern::Checker, 0);
    let cfg = RegistrationConfig {
        iterations: 40,
        ..RegistrationConfig::default()
    };
    let report = compare_kernels(&p.source, &p.target, &cfg).unwrap();
    assert_eq!(report.wendland31.locality, 0.0);
    assert!(report.tps.locality > 0.0);
    assert_eq!(report.tps.kernel, KernelFamily::Tps);
}

#[test]
fn kernel_comparison_on_identity() {
    let (_, p) = pair(SyntheticPreset::Identity, Pattern::CheckerBlob, 0);
    let cfg = RegistrationConfig {
        iterations: 20,
        ..RegistrationConfig::default()
    };
    let report = compare_kernels(&p.source, &p.target, &cfg).unwrap();
    assert!(report.tps.metrics.l1 <= 1e-3);
    assert!(report.wendland31.metrics.l1 <= 1e-3);
}
