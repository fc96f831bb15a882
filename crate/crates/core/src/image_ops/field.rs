use std::io::{BufRead, Write};

use crate::control_grid::Frame;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Per-pixel source coordinates for backward warping.
///
/// Entry `(x, y)` is the point, in frame units, that output pixel `(x, y)`
/// samples from the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    frame: Frame,
    data: Vec<Vec2>,
}

impl DisplacementField {
    pub fn new(frame: Frame, data: Vec<Vec2>) -> Result<Self> {
        if data.len() != frame.pixel_count() {
            return Err(Error::contract(format!(
                "{}x{} field needs {} coordinates, got {}",
                frame.width,
                frame.height,
                frame.pixel_count(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|p| !p.is_finite()) {
            return Err(Error::domain(format!("field coordinate {i} is not finite")));
        }
        Ok(DisplacementField { frame, data })
    }

    /// The field that samples every pixel from its own center.
    pub fn identity(frame: Frame) -> Self {
        let data = (0..frame.height)
            .flat_map(|y| (0..frame.width).map(move |x| frame.pixel_center(x, y)))
            .collect();
        DisplacementField { frame, data }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn width(&self) -> usize {
        self.frame.width
    }

    pub fn height(&self) -> usize {
        self.frame.height
    }

    pub fn data(&self) -> &[Vec2] {
        &self.data
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> Vec2 {
        self.data[y * self.frame.width + x]
    }

    /// Writes the `DFIELD` format: an ASCII header `DFIELD <W> <H>\n` followed
    /// by `W·H` little-endian `f32` pairs `(x, y)` in row-major order.
    pub fn write_dfield<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "DFIELD {} {}", self.frame.width, self.frame.height)?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for p in &self.data {
            buf.extend_from_slice(&(p.x as f32).to_le_bytes());
            buf.extend_from_slice(&(p.y as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
        out.flush()
    }

    /// Parses a `DFIELD` stream. The format does not record the coordinate
    /// convention, so the caller supplies it.
    pub fn read_dfield<R: BufRead>(mut input: R, normalized: bool) -> Result<Self> {
        let bad = |msg: String| Error::contract(format!("malformed DFIELD: {msg}"));
        let mut header = Vec::new();
        input
            .read_until(b'\n', &mut header)
            .map_err(|e| bad(e.to_string()))?;
        let header = std::str::from_utf8(&header).map_err(|e| bad(e.to_string()))?;
        let mut parts = header.trim_end_matches('\n').split(' ');
        if parts.next() != Some("DFIELD") {
            return Err(bad("missing magic".into()));
        }
        let mut dim = |name: &str| -> Result<usize> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("missing or invalid {name}")))
        };
        let (w, h) = (dim("width")?, dim("height")?);
        let frame = Frame::new(w, h, normalized)?;
        let mut raw = vec![0u8; w * h * 8];
        input.read_exact(&mut raw).map_err(|e| bad(e.to_string()))?;
        let data = raw
            .chunks_exact(8)
            .map(|c| {
                let x = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let y = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Vec2::new(x as f64, y as f64)
            })
            .collect();
        Self::new(frame, data)
    }
}
