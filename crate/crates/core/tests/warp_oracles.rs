mod common;

use common::random_theta;
use cswarp_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wendland(alpha: f64) -> KernelSpec {
    KernelSpec::wendland31(alpha).unwrap()
}

#[test]
fn theta_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let frame = Frame::normalized(20, 16).unwrap();
    let grid = make_grid(5, 5, frame).unwrap();
    let d = grid_distance_d(&grid);
    let h = 1e-6;
    for trial in 0..6 {
        let theta = random_theta(&mut rng, 25, 0.1);
        let (kernel, affine) = if trial % 2 == 0 {
            (wendland(d + rng.gen_range(0.0..3.0)), false)
        } else {
            (KernelSpec::Tps, true)
        };
        let model = WarpModel::fit_grid(&grid, &theta, kernel, affine, 0.0).unwrap();
        let jac = field_jacobians(&model, &frame, &grid).unwrap();
        for j in [0, 7, 12, 24] {
            for axis in 0..2 {
                let bump = |s: f64| {
                    let mut t = theta.clone();
                    let v = &mut t.as_mut_slice()[j];
                    if axis == 0 {
                        v.x += s
                    } else {
                        v.y += s
                    }
                    WarpModel::fit_grid(&grid, &t, kernel, affine, 0.0).unwrap().evaluate_field(&frame)
                };
                let (fp, fm) = (bump(h), bump(-h));
                for y in 0..frame.height {
                    for x in 0..frame.width {
                        let fd = (fp.at(x, y) - fm.at(x, y)) * (0.5 / h);
                        let exact = jac.dtheta(x, y, j, axis);
                        assert!((fd - exact).norm() < 1e-5, "trial {trial} j {j} axis {axis} at ({x},{y}): {fd:?} vs {exact:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn alpha_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let frame = Frame::normalized(20, 16).unwrap();
    let grid = make_grid(5, 5, frame).unwrap();
    let d = grid_distance_d(&grid);
    let h = 1e-6;
    for _ in 0..5 {
        let theta = random_theta(&mut rng, 25, 0.1);
        let alpha = d + rng.gen_range(0.1..3.0);
        let model = WarpModel::fit_grid(&grid, &theta, wendland(alpha), false, 0.0).unwrap();
        let jac = field_jacobians(&model, &frame, &grid).unwrap();
        let fp = WarpModel::fit_grid(&grid, &theta, wendland(alpha + h), false, 0.0).unwrap().evaluate_field(&frame);
        let fm = WarpModel::fit_grid(&grid, &theta, wendland(alpha - h), false, 0.0).unwrap().evaluate_field(&frame);
        for y in 0..frame.height {
            for x in 0..frame.width {
                let fd = (fp.at(x, y) - fm.at(x, y)) * (0.5 / h);
                assert!((fd - jac.dalpha_at(x, y)).norm() < 1e-5, "{fd:?} vs {:?}", jac.dalpha_at(x, y));
            }
        }
    }
}

#[test]
fn compact_support_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let (rows, cols) = (rng.gen_range(2..6), rng.gen_range(2..6));
        let frame = Frame::new(rng.gen_range(8..64), rng.gen_range(8..64), rng.gen_bool(0.5)).unwrap();
        let grid = make_grid(rows, cols, frame).unwrap();
        let d = grid_distance_d(&grid);
        let alpha = d * rng.gen_range(1.0..3.0);
        let scale = grid.spacing().x.max(grid.spacing().y);
        let theta = random_theta(&mut rng, rows * cols, 0.3 * scale);
        let model = WarpModel::fit_grid(&grid, &theta, wendland(alpha), false, 0.0).unwrap();
        let mut probed = 0;
        while probed < 20 {
            let p = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)) * (scale * 2.0);
            if grid.base().iter().all(|c| c.distance(p) >= alpha) {
                assert_eq!(model.evaluate_point(p), p);
                probed += 1;
            }
        }
    }
}

#[test]
fn thin_plate_moves_far_points() {
    let frame = Frame::normalized(32, 32).unwrap();
    let grid = make_grid(3, 3, frame).unwrap();
    let d = grid_distance_d(&grid);
    let mut theta = Displacements::zeros(9);
    theta.as_mut_slice()[4] = Vec2::new(0.13, -0.07);
    let model = WarpModel::fit_grid(&grid, &theta, KernelSpec::Tps, true, 0.0).unwrap();
    let far = Vec2::new(1.0 + 4.0 * d, 0.3);
    assert!(grid.base().iter().all(|c| c.distance(far) >= 4.0 * d));
    assert!((model.evaluate_point(far) - far).norm() > 1e-9);
}

#[test]
fn interpolation_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for i in 0..100 {
        let frame = Frame::new(rng.gen_range(16..200), rng.gen_range(16..200), i % 3 != 0).unwrap();
        let grid = make_grid(5, 5, frame).unwrap();
        let scale = grid.spacing().x.min(grid.spacing().y);
        let theta = random_theta(&mut rng, 25, 0.4 * scale);
        let targets = grid.targets(&theta).unwrap();
        let d = grid_distance_d(&grid);
        for (kernel, affine) in [(KernelSpec::Tps, true), (wendland(d * rng.gen_range(1.0..4.0)), i % 2 == 0)] {
            let model = WarpModel::fit_grid(&grid, &theta, kernel, affine, 0.0).unwrap();
            for (c, t) in grid.base().iter().zip(&targets) {
                let err = (model.evaluate_point(*c) - *t).norm();
                assert!(err < 1e-6 * scale.max(1.0), "{kernel:?}: {err}");
            }
        }
    }
}

#[test]
fn field_is_linear_in_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let frame = Frame::normalized(24, 18).unwrap();
    let grid = make_grid(4, 5, frame).unwrap();
    let kernel = wendland(grid_distance_d(&grid) * 1.7);
    let (a, b) = (random_theta(&mut rng, 20, 0.1), random_theta(&mut rng, 20, 0.1));
    let sum = Displacements::new(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| *x + *y).collect()).unwrap();
    let fa = WarpModel::fit_grid(&grid, &a, kernel, false, 0.0).unwrap().evaluate_field(&frame);
    let fb = WarpModel::fit_grid(&grid, &b, kernel, false, 0.0).unwrap().evaluate_field(&frame);
    let fs = WarpModel::fit_grid(&grid, &sum, kernel, false, 0.0).unwrap().evaluate_field(&frame);
    let id = DisplacementField::identity(frame);
    for i in 0..id.data().len() {
        let lhs = fs.data()[i] - id.data()[i];
        let rhs = (fa.data()[i] - id.data()[i]) + (fb.data()[i] - id.data()[i]);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

#[test]
fn uniform_offset_is_a_translation_with_affine() {
    let frame = Frame::pixel(50, 40).unwrap();
    let grid = make_grid(4, 4, frame).unwrap();
    let t = Vec2::new(2.5, -1.25);
    let theta = Displacements::new(vec![t; 16]).unwrap();
    let model = WarpModel::fit_grid(&grid, &theta, KernelSpec::Tps, true, 0.0).unwrap();
    for p in [Vec2::new(0.0, 0.0), Vec2::new(17.3, 33.1), Vec2::new(-200.0, 90.0)] {
        assert!((model.evaluate_point(p) - (p + t)).norm() < 1e-9);
    }
    assert!(bending_energy(&model).unwrap().abs() < 1e-12);
}

#[test]
fn rigid_motions_commute_with_fitting() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let frame = Frame::normalized(30, 30).unwrap();
    let grid = make_grid(4, 4, frame).unwrap();
    let targets_of = |centers: &[Vec2], theta: &Displacements| -> Vec<Vec2> {
        centers.iter().zip(theta.as_slice()).map(|(c, d)| *c + *d).collect()
    };
    for _ in 0..10 {
        let theta = random_theta(&mut rng, 16, 0.15);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let shift = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let motion = |p: Vec2| p.rotated(angle) + shift;
        let kernel = wendland(1.9);
        for affine in [false, true] {
            let base = fit_interpolant(grid.base(), &targets_of(grid.base(), &theta), kernel, affine, 0.0).unwrap();
            let moved_centers: Vec<Vec2> = grid.base().iter().map(|p| motion(*p)).collect();
            let moved_targets: Vec<Vec2> = targets_of(grid.base(), &theta).into_iter().map(motion).collect();
            let moved = fit_interpolant(&moved_centers, &moved_targets, kernel, affine, 0.0).unwrap();
            for _ in 0..20 {
                let p = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
                let err = (moved.evaluate_point(motion(p)) - motion(base.evaluate_point(p))).norm();
                assert!(err < 1e-9, "affine={affine}: {err}");
            }
        }
    }
}
