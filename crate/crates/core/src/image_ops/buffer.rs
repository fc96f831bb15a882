use crate::error::{Error, Result};

/// Row-major float image with 1 or 3 interleaved channels, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::contract(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::contract("image dimensions must be non-zero"));
        }
        if data.len() != width * height * channels {
            return Err(Error::contract(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) {
            return Err(Error::domain(format!(
                "sample {i} is {} which is outside [0, 1]",
                data[i]
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image from a per-pixel closure returning channel values.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, &mut [f64]),
    ) -> Result<Self> {
        let mut data = vec![0.0; width * height * channels];
        for y in 0..height {
            for x in 0..width {
                let i = (y * width + x) * channels;
                f(x, y, &mut data[i..i + channels]);
            }
        }
        Self::new(width, height, channels, data)
    }

    /// Wraps data that is known to be in range (results of convex combinations
    /// of valid images).
    pub(crate) fn from_valid(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        ImageBuffer {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn check_same_shape(&self, other: &ImageBuffer, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "{what}: shape mismatch {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )))
        }
    }

    /// Halves both dimensions with a 2×2 box filter; a trailing odd row or
    /// column is dropped.
    pub fn downsample2(&self) -> Result<ImageBuffer> {
        let (w, h) = (self.width / 2, self.height / 2);
        if w == 0 || h == 0 {
            return Err(Error::contract("image too small to downsample"));
        }
        let c = self.channels;
        let mut data = vec![0.0; w * h * c];
        for y in 0..h {
            for x in 0..w {
                for k in 0..c {
                    let s = self.pixel(2 * x, 2 * y)[k]
                        + self.pixel(2 * x + 1, 2 * y)[k]
                        + self.pixel(2 * x, 2 * y + 1)[k]
                        + self.pixel(2 * x + 1, 2 * y + 1)[k];
                    data[(y * w + x) * c + k] = 0.25 * s;
                }
            }
        }
        Ok(ImageBuffer::from_valid(w, h, c, data))
    }

    /// Horizontal concatenation of equally tall images with the same channel count.
    pub fn hstack(images: &[&ImageBuffer]) -> Result<ImageBuffer> {
        let first = images
            .first()
            .ok_or_else(|| Error::contract("nothing to stack"))?;
        let (h, c) = (first.height, first.channels);
        if images.iter().any(|im| im.height != h || im.channels != c) {
            return Err(Error::contract("hstack needs equal heights and channel counts"));
        }
        let w: usize = images.iter().map(|im| im.width).sum();
        let mut data = Vec::with_capacity(w * h * c);
        for y in 0..h {
            for im in images {
                let row = y * im.width * c;
                data.extend_from_slice(&im.data[row..row + im.width * c]);
            }
        }
        Ok(ImageBuffer::from_valid(w, h, c, data))
    }
}

/// Per-pixel blend weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::contract(format!(
                "{width}x{height} mask needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) {
            return Err(Error::domain(format!(
                "mask sample {i} is {} which is outside [0, 1]",
                data[i]
            )));
        }
        Ok(Mask {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Reads a single-channel image as a mask.
    pub fn from_image(image: &ImageBuffer) -> Result<Self> {
        if image.channels() != 1 {
            return Err(Error::contract(format!(
                "mask must be single-channel, got {} channels",
                image.channels()
            )));
        }
        Ok(Mask {
            width: image.width(),
            height: image.height(),
            data: image.data().to_vec(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}
