use serde::{Deserialize, Serialize};

use super::{DisplacementField, ImageBuffer};
use crate::error::Result;
use crate::geometry::Vec2;

/// How samples outside the image are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Border {
    /// Edge replication.
    #[default]
    Clamp,
    /// Everything outside the image is zero.
    Zeros,
}

/// Coordinates this close to an integer are snapped onto it, so a field that
/// round-trips pixel centers through the normalized frame samples exactly.
const SNAP: f64 = 1e-9;

#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

struct Cell {
    tx: f64,
    ty: f64,
    // x0, x1, y0, y1 as resolved indices; None means a zero sample.
    xs: [Option<usize>; 2],
    ys: [Option<usize>; 2],
}

#[inline]
fn resolve(i: f64, n: usize, border: Border) -> Option<usize> {
    match border {
        Border::Clamp => Some(i.clamp(0.0, (n - 1) as f64) as usize),
        Border::Zeros => {
            if i >= 0.0 && i <= (n - 1) as f64 {
                Some(i as usize)
            } else {
                None
            }
        }
    }
}

#[inline]
fn cell(image: &ImageBuffer, p: Vec2, border: Border) -> Cell {
    let (x, y) = (snap(p.x), snap(p.y));
    let (fx, fy) = (x.floor(), y.floor());
    let (w, h) = (image.width(), image.height());
    Cell {
        tx: x - fx,
        ty: y - fy,
        xs: [resolve(fx, w, border), resolve(fx + 1.0, w, border)],
        ys: [resolve(fy, h, border), resolve(fy + 1.0, h, border)],
    }
}

#[inline]
fn fetch(image: &ImageBuffer, x: Option<usize>, y: Option<usize>, k: usize) -> f64 {
    match (x, y) {
        (Some(x), Some(y)) => image.pixel(x, y)[k],
        _ => 0.0,
    }
}

/// Bilinear interpolation at continuous pixel coordinates `p` (pixel centers
/// on integers). Writes one value per channel into `out`.
pub fn bilinear_sample(image: &ImageBuffer, p: Vec2, border: Border, out: &mut [f64]) {
    let c = cell(image, p, border);
    for (k, o) in out.iter_mut().enumerate().take(image.channels()) {
        let a = fetch(image, c.xs[0], c.ys[0], k);
        let b = fetch(image, c.xs[1], c.ys[0], k);
        let d = fetch(image, c.xs[0], c.ys[1], k);
        let e = fetch(image, c.xs[1], c.ys[1], k);
        *o = lerp(lerp(a, b, c.tx), lerp(d, e, c.tx), c.ty);
    }
}

/// Like [`bilinear_sample`], additionally returning the spatial derivatives
/// (per pixel unit) of each channel inside the containing cell.
pub fn bilinear_sample_grad(
    image: &ImageBuffer,
    p: Vec2,
    border: Border,
    out: &mut [f64],
    grad: &mut [Vec2],
) {
    let c = cell(image, p, border);
    for k in 0..image.channels() {
        let a = fetch(image, c.xs[0], c.ys[0], k);
        let b = fetch(image, c.xs[1], c.ys[0], k);
        let d = fetch(image, c.xs[0], c.ys[1], k);
        let e = fetch(image, c.xs[1], c.ys[1], k);
        let top = lerp(a, b, c.tx);
        let bottom = lerp(d, e, c.tx);
        out[k] = lerp(top, bottom, c.ty);
        grad[k] = Vec2::new(lerp(b - a, e - d, c.ty), bottom - top);
    }
}

/// Gathers `image` through `field`: output pixel `p` takes the source value at
/// `field(p)`. The field's coordinate convention is applied to the source
/// image's own size.
pub fn backward_warp(image: &ImageBuffer, field: &DisplacementField, border: Border) -> Result<ImageBuffer> {
    let src_frame = field.frame().with_size(image.width(), image.height());
    let c = image.channels();
    let mut data = vec![0.0; field.width() * field.height() * c];
    for (out, &q) in data.chunks_exact_mut(c).zip(field.data()) {
        bilinear_sample(image, src_frame.to_pixel(q), border, out);
        for v in out.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }
    Ok(ImageBuffer::from_valid(field.width(), field.height(), c, data))
}
