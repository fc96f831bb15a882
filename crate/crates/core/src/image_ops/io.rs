use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageError, ImageFormat, ImageReader};

use super::ImageBuffer;
use crate::error::{Error, Result};

fn image_error(path: &Path, err: ImageError) -> Error {
    match err {
        ImageError::IoError(source) => Error::io(path, source),
        other => Error::Image {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Reads an 8-bit grayscale or RGB PNG, mapping `v ↦ v / 255`.
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(Error::Image {
            path: path.to_path_buf(),
            reason: "not a PNG file".into(),
        });
    }
    let decoded = reader.decode().map_err(|e| image_error(path, e))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, raw) = match decoded {
        DynamicImage::ImageLuma8(buf) => (1, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => (3, buf.into_raw()),
        other => {
            return Err(Error::Image {
                path: path.to_path_buf(),
                reason: format!(
                    "unsupported pixel format {:?}; expected 8-bit gray or RGB",
                    other.color()
                ),
            })
        }
    };
    let data = raw.into_iter().map(|v| v as f64 / 255.0).collect();
    ImageBuffer::new(w, h, channels, data)
}

fn quantize(image: &ImageBuffer) -> Vec<u8> {
    image
        .data()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// PNG bytes for `image`, quantized with `round(v · 255)`.
pub fn encode_png(image: &ImageBuffer) -> Result<Vec<u8>> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let raw = quantize(image);
    let dynamic = if image.channels() == 1 {
        DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, raw).expect("sized buffer"))
    } else {
        DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, raw).expect("sized buffer"))
    };
    let mut bytes = Cursor::new(Vec::new());
    dynamic
        .write_to(&mut bytes, ImageFormat::Png)
        .map_err(|e| Error::Image {
            path: "<memory>".into(),
            reason: e.to_string(),
        })?;
    Ok(bytes.into_inner())
}

pub fn save_png(image: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(image)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
