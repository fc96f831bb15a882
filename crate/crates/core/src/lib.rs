//! Non-rigid 2D image warping with thin-plate splines and compactly supported
//! Wendland radial basis functions, plus intensity-based registration of the
//! warp parameters.
//!
//! The main pieces:
//!
//! * [`kernels`]: the radial functions and their derivatives;
//! * [`control_grid`]: control lattices, displacements θ, and the support
//!   clamp `α = λ_α·α̂ + D`;
//! * [`warp`]: fitting the interpolant and evaluating it, with exact
//!   derivatives with respect to θ and α;
//! * [`image_ops`]: bilinear backward warping, compositing, L1 and SSIM;
//! * [`registration`]: gradient-based recovery of θ and α from image pairs.

pub mod config;
pub mod control_grid;
pub mod delaunay;
pub mod error;
pub mod geometry;
pub mod image_ops;
pub mod kernels;
pub mod registration;
pub mod warp;

pub use config::{WarpConfig, WarpDocument};
pub use control_grid::{
    clamp_support, grid_distance_d, make_grid, ControlGrid, Displacements, Frame, SupportPolicy,
};
pub use delaunay::{delaunay_max_edge, Triangulation};
pub use error::{Error, Result};
pub use geometry::Vec2;
pub use image_ops::{
    backward_warp, bilinear_sample, composite, l1_distance, load_png, save_png, ssim, Border,
    DisplacementField, ImageBuffer, Mask,
};
pub use kernels::{KernelFamily, KernelSpec};
pub use registration::{
    compare_kernels, loss_and_grad, make_synthetic_pair, register, ComparisonReport, LossGrad,
    Metrics, Pattern, RegistrationConfig, RegistrationResult, SyntheticPair, SyntheticPreset,
    SyntheticSpec,
};
pub use warp::{bending_energy, field_jacobians, fit_interpolant, WarpModel};
