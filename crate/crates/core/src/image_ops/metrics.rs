use super::{ImageBuffer, Mask};
use crate::error::{Error, Result};

/// `m̂ ⊙ warped + (1 - m̂) ⊙ render`, per channel.
pub fn composite(mask: &Mask, warped: &ImageBuffer, render: &ImageBuffer) -> Result<ImageBuffer> {
    warped.check_same_shape(render, "composite")?;
    if mask.width() != warped.width() || mask.height() != warped.height() {
        return Err(Error::contract(format!(
            "composite: mask is {}x{} but images are {}x{}",
            mask.width(),
            mask.height(),
            warped.width(),
            warped.height()
        )));
    }
    let c = warped.channels();
    let data = warped
        .data()
        .iter()
        .zip(render.data())
        .enumerate()
        .map(|(i, (&a, &b))| {
            let m = mask.data()[i / c];
            // Pin to the convex hull of the inputs to absorb rounding.
            (m * a + (1.0 - m) * b).clamp(a.min(b), a.max(b))
        })
        .collect();
    Ok(ImageBuffer::from_valid(warped.width(), warped.height(), c, data))
}

/// Mean absolute difference over all pixels and channels.
pub fn l1_distance(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.check_same_shape(b, "l1_distance")?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.data().len() as f64)
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

/// Separable "valid" filtering: output is `(w - 10) × (h - 10)`.
fn filter_valid(plane: &[f64], w: usize, h: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w + 1 - SSIM_WINDOW;
    let oh = h + 1 - SSIM_WINDOW;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = taps.iter().zip(&row[x..]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * horiz[(y + k) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// `K1 = 0.01`, `K2 = 0.03` and dynamic range 1, over all window positions
/// fully inside the image, averaged over channels.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.check_same_shape(b, "ssim")?;
    let (w, h, c) = (a.width(), a.height(), a.channels());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::contract(format!(
            "ssim needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let c1 = (SSIM_K1 * 1.0f64).powi(2);
    let c2 = (SSIM_K2 * 1.0f64).powi(2);
    let taps = gaussian_window();

    let mut total = 0.0;
    for k in 0..c {
        let x: Vec<f64> = a.data().iter().skip(k).step_by(c).copied().collect();
        let y: Vec<f64> = b.data().iter().skip(k).step_by(c).copied().collect();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();

        let mu_x = filter_valid(&x, w, h, &taps);
        let mu_y = filter_valid(&y, w, h, &taps);
        let e_xx = filter_valid(&xx, w, h, &taps);
        let e_yy = filter_valid(&yy, w, h, &taps);
        let e_xy = filter_valid(&xy, w, h, &taps);

        let mut sum = 0.0;
        for i in 0..mu_x.len() {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sxx = e_xx[i] - mx * mx;
            let syy = e_yy[i] - my * my;
            let sxy = e_xy[i] - mx * my;
            let num = (2.0 * mx * my + c1) * (2.0 * sxy + c2);
            let den = (mx * mx + my * my + c1) * (sxx + syy + c2);
            sum += num / den;
        }
        total += sum / mu_x.len() as f64;
    }
    Ok(total / c as f64)
}
