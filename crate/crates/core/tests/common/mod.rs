#![allow(dead_code)]

use cswarp_core::{Displacements, ImageBuffer, Vec2};
use rand::Rng;

pub fn random_theta(rng: &mut impl Rng, n: usize, amplitude: f64) -> Displacements {
    Displacements::new(
        (0..n)
            .map(|_| Vec2::new(rng.gen_range(-amplitude..amplitude), rng.gen_range(-amplitude..amplitude)))
            .collect(),
    )
    .unwrap()
}

/// Gray sinusoidal checkerboard with `cell`-pixel squares and soft edges.
pub fn soft_checker(width: usize, height: usize, cell: f64, phase: (f64, f64)) -> ImageBuffer {
    ImageBuffer::from_fn(width, height, 1, |x, y, px| {
        let u = std::f64::consts::PI * (x as f64 + phase.0) / cell;
        let v = std::f64::consts::PI * (y as f64 + phase.1) / cell;
        px[0] = 0.5 + 0.4 * (u.sin() * v.sin()).tanh() / 1f64.tanh();
    })
    .unwrap()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
