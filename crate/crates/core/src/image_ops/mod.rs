//! Float images, bilinear backward warping, mask compositing and image metrics.

mod buffer;
mod field;
mod io;
mod metrics;
mod sample;

pub use buffer::{ImageBuffer, Mask};
pub use field::DisplacementField;
pub use io::{encode_png, load_png, save_png};
pub use metrics::{composite, l1_distance, ssim, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
pub use sample::{backward_warp, bilinear_sample, bilinear_sample_grad, Border};
