//! JSON documents describing a warp: the control lattice, its displacements
//! and the kernel, optionally followed by the solved coefficients.
//!
//! ```json
//! {"grid":{"rows":5,"cols":5},
//!  "frame":{"width":96,"height":128,"normalized":true},
//!  "theta":[[0.0,0.0], ...],
//!  "kernel":{"family":"wendland31","alpha_hat":0.3,"lambda_alpha":6.0}}
//! ```
//!
//! `theta` is row-major. The Delaunay distance `D` is always recomputed from
//! the lattice.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::control_grid::{grid_distance_d, make_grid, ControlGrid, Displacements, Frame, SupportPolicy};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::warp::{fit_interpolant, WarpModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: KernelFamily,
    /// Required for `wendland31`; ignored by `tps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_hat: Option<f64>,
    #[serde(default = "default_lambda_alpha")]
    pub lambda_alpha: f64,
}

fn default_lambda_alpha() -> f64 {
    SupportPolicy::DEFAULT_LAMBDA_ALPHA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpConfig {
    pub grid: GridConfig,
    pub frame: Frame,
    pub theta: Vec<Vec2>,
    pub kernel: KernelConfig,
    /// Defaults to `true` for `tps` and `false` for `wendland31`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub with_affine: Option<bool>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub lambda_reg: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Deserializes JSON, reporting failures with the path of the offending key.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, e.into_inner().to_string())
    })
}

impl WarpConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: WarpConfig = parse_json(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is serializable")
    }

    pub fn with_affine(&self) -> bool {
        self.with_affine
            .unwrap_or(self.kernel.family == KernelFamily::Tps)
    }

    /// Checks every field, naming the offending key on failure.
    pub fn validate(&self) -> Result<()> {
        if self.grid.rows < 2 {
            return Err(schema("grid.rows", "must be >= 2"));
        }
        if self.grid.cols < 2 {
            return Err(schema("grid.cols", "must be >= 2"));
        }
        if self.frame.width < 2 {
            return Err(schema("frame.width", "must be >= 2"));
        }
        if self.frame.height < 2 {
            return Err(schema("frame.height", "must be >= 2"));
        }
        let n = self.grid.rows * self.grid.cols;
        if self.theta.len() != n {
            return Err(schema(
                "theta",
                format!("expected {n} offsets (rows*cols), got {}", self.theta.len()),
            ));
        }
        if let Some(i) = self.theta.iter().position(|d| !d.is_finite()) {
            return Err(schema(&format!("theta[{i}]"), "offset is not finite"));
        }
        if !(self.kernel.lambda_alpha.is_finite() && self.kernel.lambda_alpha > 0.0) {
            return Err(schema("kernel.lambda_alpha", "must be finite and > 0"));
        }
        if self.kernel.family == KernelFamily::Wendland31 {
            match self.kernel.alpha_hat {
                None => return Err(schema("kernel.alpha_hat", "required for wendland31")),
                Some(a) if !(a > 0.0 && a < 1.0) => {
                    return Err(schema("kernel.alpha_hat", format!("must lie in (0, 1), got {a}")))
                }
                _ => {}
            }
        }
        if self.kernel.family == KernelFamily::Tps && self.with_affine == Some(false) {
            return Err(schema("with_affine", "tps requires the affine part"));
        }
        if !(self.lambda_reg.is_finite() && self.lambda_reg >= 0.0) {
            return Err(schema("lambda_reg", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn control_grid(&self) -> Result<ControlGrid> {
        make_grid(self.grid.rows, self.grid.cols, self.frame)
    }

    pub fn displacements(&self) -> Result<Displacements> {
        Displacements::new(self.theta.clone())
    }

    /// Kernel with the support radius `α = λ_α·α̂ + D` resolved for `grid`.
    pub fn kernel_spec(&self, grid: &ControlGrid) -> Result<KernelSpec> {
        match self.kernel.family {
            KernelFamily::Tps => Ok(KernelSpec::Tps),
            KernelFamily::Wendland31 => {
                let alpha_hat = self
                    .kernel
                    .alpha_hat
                    .ok_or_else(|| schema("kernel.alpha_hat", "required for wendland31"))?;
                let policy = SupportPolicy::new(self.kernel.lambda_alpha, grid_distance_d(grid))?;
                KernelSpec::wendland31(policy.clamp(alpha_hat)?)
            }
        }
    }

    /// Builds the lattice and solves the warp it describes.
    pub fn build(&self) -> Result<(ControlGrid, WarpModel)> {
        self.validate()?;
        let grid = self.control_grid()?;
        let kernel = self.kernel_spec(&grid)?;
        let targets = grid.targets(&self.displacements()?)?;
        let model = fit_interpolant(grid.base(), &targets, kernel, self.with_affine(), self.lambda_reg)?;
        Ok((grid, model))
    }
}

/// A warp configuration together with its solved coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpDocument {
    pub grid: GridConfig,
    pub frame: Frame,
    pub theta: Vec<Vec2>,
    pub kernel: KernelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub with_affine: Option<bool>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub lambda_reg: f64,
    pub coeffs: Vec<Vec2>,
    pub affine: Option<[[f64; 3]; 2]>,
}

impl WarpDocument {
    pub fn new(config: &WarpConfig, model: &WarpModel) -> Self {
        WarpDocument {
            grid: config.grid,
            frame: config.frame,
            theta: config.theta.clone(),
            kernel: config.kernel,
            with_affine: config.with_affine,
            lambda_reg: config.lambda_reg,
            coeffs: model.coeffs().to_vec(),
            affine: model.affine().copied(),
        }
    }

    pub fn config(&self) -> WarpConfig {
        WarpConfig {
            grid: self.grid,
            frame: self.frame,
            theta: self.theta.clone(),
            kernel: self.kernel,
            with_affine: self.with_affine,
            lambda_reg: self.lambda_reg,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: WarpDocument = parse_json(text)?;
        doc.config().validate()?;
        if doc.coeffs.len() != doc.theta.len() {
            return Err(schema("coeffs", "must have one entry per control point"));
        }
        if doc.affine.is_some() != doc.config().with_affine() {
            return Err(schema("affine", "presence must match with_affine"));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document is serializable")
    }

    /// The stored model, without re-solving.
    pub fn model(&self) -> Result<WarpModel> {
        let cfg = self.config();
        let grid = cfg.control_grid()?;
        let kernel = cfg.kernel_spec(&grid)?;
        WarpModel::from_parts(kernel, grid.base().to_vec(), self.coeffs.clone(), self.affine, self.lambda_reg)
    }
}
