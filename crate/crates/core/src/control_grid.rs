//! Control-point lattices, their displacements, and the support-radius clamp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Coordinate system attached to an image of `width × height` pixels.
///
/// In the normalized frame the image covers `[-1, 1]²` and pixel `(i, j)` has
/// its center at `((i + 0.5)·2/W - 1, (j + 0.5)·2/H - 1)`. Otherwise
/// coordinates are raw pixel indices with pixel centers on integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_normalized")]
    pub normalized: bool,
}

fn default_normalized() -> bool {
    true
}

impl Frame {
    pub fn new(width: usize, height: usize, normalized: bool) -> Result<Self> {
        let frame = Frame {
            width,
            height,
            normalized,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn normalized(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, true)
    }

    pub fn pixel(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, false)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::domain(format!(
                "frame must be at least 2x2 pixels, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// Same coordinate convention for an image of different size.
    pub fn with_size(&self, width: usize, height: usize) -> Frame {
        Frame {
            width,
            height,
            normalized: self.normalized,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Lower and upper coordinate bound along x and y, inclusive.
    pub fn extent(&self) -> ((f64, f64), (f64, f64)) {
        if self.normalized {
            ((-1.0, 1.0), (-1.0, 1.0))
        } else {
            (
                (0.0, (self.width - 1) as f64),
                (0.0, (self.height - 1) as f64),
            )
        }
    }

    /// Frame-unit length of one pixel step along x and y.
    pub fn pixel_size(&self) -> Vec2 {
        if self.normalized {
            Vec2::new(2.0 / self.width as f64, 2.0 / self.height as f64)
        } else {
            Vec2::new(1.0, 1.0)
        }
    }

    /// Coordinates of the center of pixel `(col, row)`.
    #[inline]
    pub fn pixel_center(&self, col: usize, row: usize) -> Vec2 {
        if self.normalized {
            Vec2::new(
                (2 * col + 1) as f64 / self.width as f64 - 1.0,
                (2 * row + 1) as f64 / self.height as f64 - 1.0,
            )
        } else {
            Vec2::new(col as f64, row as f64)
        }
    }

    /// Continuous pixel index of a frame coordinate (inverse of [`Frame::pixel_center`]).
    #[inline]
    pub fn to_pixel(&self, p: Vec2) -> Vec2 {
        if self.normalized {
            Vec2::new(
                ((p.x + 1.0) * self.width as f64 - 1.0) * 0.5,
                ((p.y + 1.0) * self.height as f64 - 1.0) * 0.5,
            )
        } else {
            p
        }
    }
}

/// Regular lattice of control points spanning a frame, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    rows: usize,
    cols: usize,
    frame: Frame,
    base: Vec<Vec2>,
}

impl ControlGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn base(&self) -> &[Vec2] {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Horizontal and vertical spacing between neighbouring control points.
    pub fn spacing(&self) -> Vec2 {
        let ((x0, x1), (y0, y1)) = self.frame.extent();
        Vec2::new(
            (x1 - x0) / (self.cols - 1) as f64,
            (y1 - y0) / (self.rows - 1) as f64,
        )
    }

    /// Control points moved by `theta`.
    pub fn targets(&self, theta: &Displacements) -> Result<Vec<Vec2>> {
        theta.check_len(self.len())?;
        Ok(self
            .base
            .iter()
            .zip(theta.as_slice())
            .map(|(&c, &d)| c + d)
            .collect())
    }
}

/// Evenly spaced `rows × cols` lattice over the frame's full extent, endpoints included.
pub fn make_grid(rows: usize, cols: usize, frame: Frame) -> Result<ControlGrid> {
    if rows < 2 || cols < 2 {
        return Err(Error::domain(format!(
            "control grid needs at least 2 rows and 2 columns, got {rows}x{cols}"
        )));
    }
    frame.validate()?;
    let ((x0, x1), (y0, y1)) = frame.extent();
    let lerp = |lo: f64, hi: f64, i: usize, n: usize| {
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut base = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let y = lerp(y0, y1, r, rows);
        for c in 0..cols {
            base.push(Vec2::new(lerp(x0, x1, c, cols), y));
        }
    }
    Ok(ControlGrid {
        rows,
        cols,
        frame,
        base,
    })
}

/// `√(a² + b²)` for vertical spacing `a` and horizontal spacing `b`: the
/// longest Delaunay edge of a regular lattice (a cell diagonal).
pub fn grid_distance_d(grid: &ControlGrid) -> f64 {
    let s = grid.spacing();
    s.x.hypot(s.y)
}

/// Per-control-point offsets, row-major, in frame units.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Displacements(Vec<Vec2>);

impl Displacements {
    pub fn new(theta: Vec<Vec2>) -> Result<Self> {
        if let Some(i) = theta.iter().position(|d| !d.is_finite()) {
            return Err(Error::domain(format!("theta[{i}] is not finite")));
        }
        Ok(Displacements(theta))
    }

    pub fn zeros(n: usize) -> Self {
        Displacements(vec![Vec2::ZERO; n])
    }

    pub fn as_slice(&self) -> &[Vec2] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Vec2] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .fold(0.0f64, |m, d| m.max(d.x.abs()).max(d.y.abs()))
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::contract(format!(
                "theta has {} entries but the grid has {n} control points",
                self.0.len()
            )));
        }
        Ok(())
    }
}

impl From<Displacements> for Vec<Vec2> {
    fn from(d: Displacements) -> Self {
        d.0
    }
}

/// Maps the bounded output `α̂ ∈ (0, 1)` to a support radius `α = λ_α·α̂ + D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportPolicy {
    lambda_alpha: f64,
    min_distance: f64,
}

impl SupportPolicy {
    pub const DEFAULT_LAMBDA_ALPHA: f64 = 6.0;

    pub fn new(lambda_alpha: f64, min_distance: f64) -> Result<Self> {
        if !(lambda_alpha.is_finite() && lambda_alpha > 0.0) {
            return Err(Error::domain(format!(
                "lambda_alpha must be finite and > 0, got {lambda_alpha}"
            )));
        }
        if !(min_distance.is_finite() && min_distance > 0.0) {
            return Err(Error::domain(format!(
                "Delaunay distance D must be finite and > 0, got {min_distance}"
            )));
        }
        Ok(SupportPolicy {
            lambda_alpha,
            min_distance,
        })
    }

    /// Policy for a grid, with `D` taken from the lattice spacing.
    pub fn for_grid(grid: &ControlGrid, lambda_alpha: f64) -> Result<Self> {
        Self::new(lambda_alpha, grid_distance_d(grid))
    }

    pub fn lambda_alpha(&self) -> f64 {
        self.lambda_alpha
    }

    /// The lower bound `D` on the support radius.
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    pub fn clamp(&self, alpha_hat: f64) -> Result<f64> {
        clamp_support(alpha_hat, self)
    }
}

pub fn clamp_support(alpha_hat: f64, policy: &SupportPolicy) -> Result<f64> {
    if !(alpha_hat > 0.0 && alpha_hat < 1.0) {
        return Err(Error::domain(format!(
            "alpha_hat must lie in (0, 1), got {alpha_hat}"
        )));
    }
    Ok(policy.lambda_alpha * alpha_hat + policy.min_distance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_lattice() {
        let g = make_grid(2, 2, Frame::normalized(8, 8).unwrap()).unwrap();
        let expect = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];
        for (p, (x, y)) in g.base().iter().zip(expect) {
            assert_eq!((p.x, p.y), (x, y));
        }
    }

    #[test]
    fn five_by_five_spacing() {
        let g = make_grid(5, 5, Frame::normalized(32, 32).unwrap()).unwrap();
        assert_eq!(g.spacing(), Vec2::new(0.5, 0.5));
        assert!((grid_distance_d(&g) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn pixel_frame_lattice() {
        let g = make_grid(3, 2, Frame::pixel(192, 256).unwrap()).unwrap();
        let xs: Vec<f64> = g.base()[..2].iter().map(|p| p.x).collect();
        let ys: Vec<f64> = (0..3).map(|r| g.base()[g.index(r, 0)].y).collect();
        assert_eq!(xs, vec![0.0, 191.0]);
        assert_eq!(ys, vec![0.0, 127.5, 255.0]);
    }

    #[test]
    fn distance_on_pixel_frame() {
        // 256/4 and 192/4 spacing if the extent were the full pixel span;
        // pixel-center extents are (W-1) and (H-1).
        let frame = Frame::pixel(193, 257).unwrap();
        let g = make_grid(5, 5, frame).unwrap();
        assert_eq!(g.spacing(), Vec2::new(48.0, 64.0));
        assert_eq!(grid_distance_d(&g), 80.0);
    }

    #[test]
    fn unit_square_distance() {
        let g = make_grid(2, 2, Frame::pixel(2, 2).unwrap()).unwrap();
        assert!((grid_distance_d(&g) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_small() {
        let f = Frame::normalized(8, 8).unwrap();
        assert!(matches!(make_grid(1, 5, f), Err(Error::Domain(_))));
        assert!(make_grid(5, 1, f).is_err());
        assert!(Frame::normalized(1, 8).is_err());
    }

    #[test]
    fn base_strictly_increasing() {
        let g = make_grid(4, 7, Frame::normalized(31, 17).unwrap()).unwrap();
        for r in 0..4 {
            for c in 1..7 {
                assert!(g.base()[g.index(r, c)].x > g.base()[g.index(r, c - 1)].x);
            }
        }
        for c in 0..7 {
            for r in 1..4 {
                assert!(g.base()[g.index(r, c)].y > g.base()[g.index(r - 1, c)].y);
            }
        }
    }

    #[test]
    fn pixel_center_roundtrip() {
        let f = Frame::normalized(96, 128).unwrap();
        for &(i, j) in &[(0, 0), (95, 127), (17, 64)] {
            let p = f.to_pixel(f.pixel_center(i, j));
            assert!((p.x - i as f64).abs() < 1e-12 && (p.y - j as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn clamp_values() {
        let p = SupportPolicy::new(6.0, 80.0).unwrap();
        assert_eq!(clamp_support(0.5, &p).unwrap(), 83.0);
        assert!((clamp_support(1e-12, &p).unwrap() - 80.0).abs() < 1e-10);
        let q = SupportPolicy::new(6.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!((clamp_support(1.0 - 1e-12, &q).unwrap() - (6.0 + std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-10);
    }

    #[test]
    fn clamp_rejects_out_of_range() {
        let p = SupportPolicy::new(6.0, 1.0).unwrap();
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(clamp_support(bad, &p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn targets_length_checked() {
        let g = make_grid(3, 3, Frame::normalized(8, 8).unwrap()).unwrap();
        assert!(g.targets(&Displacements::zeros(8)).is_err());
        assert_eq!(g.targets(&Displacements::zeros(9)).unwrap(), g.base());
    }

    #[test]
    fn displacements_reject_nan() {
        assert!(Displacements::new(vec![Vec2::new(f64::NAN, 0.0)]).is_err());
    }
}
