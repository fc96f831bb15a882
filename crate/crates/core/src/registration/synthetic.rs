//! Deterministic textured test pairs with a known Wendland warp between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{GridConfig, KernelConfig, WarpConfig};
use crate::control_grid::{Displacements, Frame, SupportPolicy};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::image_ops::{backward_warp, Border, ImageBuffer};
use crate::kernels::KernelFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    Checker,
    CheckerBlob,
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "checker" => Ok(Pattern::Checker),
            "checker-blob" | "checker+blob" => Ok(Pattern::CheckerBlob),
            other => Err(Error::domain(format!(
                "unknown pattern '{other}' (expected 'checker' or 'checker-blob')"
            ))),
        }
    }
}

/// Named displacement layouts for a `rows × cols` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticPreset {
    /// All offsets zero.
    Identity,
    /// The most central control point moves by `(0.15, 0)` normalized units.
    Single,
    /// Every interior point moves by a uniform random offset in `±amplitude`.
    Random { amplitude: f64 },
}

impl std::str::FromStr for SyntheticPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(SyntheticPreset::Identity),
            "single" => Ok(SyntheticPreset::Single),
            "random" => Ok(SyntheticPreset::Random { amplitude: 0.08 }),
            other => Err(Error::domain(format!(
                "unknown preset '{other}' (expected 'identity', 'single' or 'random')"
            ))),
        }
    }
}

/// Offsets for `preset` on a `rows × cols` grid over `frame`.
///
/// Amplitudes are given in normalized units and scaled by the half-extent
/// when `frame` is a pixel frame.
pub fn preset_theta(preset: SyntheticPreset, rows: usize, cols: usize, frame: &Frame, seed: u64) -> Displacements {
    let ((x0, x1), (y0, y1)) = frame.extent();
    let scale = Vec2::new(0.5 * (x1 - x0), 0.5 * (y1 - y0));
    let mut theta = Displacements::zeros(rows * cols);
    match preset {
        SyntheticPreset::Identity => {}
        SyntheticPreset::Single => {
            theta.as_mut_slice()[(rows / 2) * cols + cols / 2] = Vec2::new(0.15 * scale.x, 0.0);
        }
        SyntheticPreset::Random { amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7468_6574_6121);
            for r in 1..rows.saturating_sub(1) {
                for c in 1..cols.saturating_sub(1) {
                    let dx = rng.gen_range(-amplitude..=amplitude);
                    let dy = rng.gen_range(-amplitude..=amplitude);
                    theta.as_mut_slice()[r * cols + c] = Vec2::new(dx * scale.x, dy * scale.y);
                }
            }
        }
    }
    theta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub pattern: Pattern,
    pub rows: usize,
    pub cols: usize,
    pub theta_star: Displacements,
    pub alpha_hat_star: f64,
    pub lambda_alpha: f64,
    pub normalized: bool,
    pub seed: u64,
}

impl SyntheticSpec {
    /// A 5×5 normalized-frame spec with `α̂* = 0.3`.
    pub fn new(width: usize, height: usize, pattern: Pattern, preset: SyntheticPreset, seed: u64) -> Result<Self> {
        let frame = Frame::normalized(width, height)?;
        Ok(SyntheticSpec {
            width,
            height,
            pattern,
            rows: 5,
            cols: 5,
            theta_star: preset_theta(preset, 5, 5, &frame, seed),
            alpha_hat_star: 0.3,
            lambda_alpha: SupportPolicy::DEFAULT_LAMBDA_ALPHA,
            normalized: true,
            seed,
        })
    }

    pub fn frame(&self) -> Result<Frame> {
        Frame::new(self.width, self.height, self.normalized)
    }

    /// The generating warp as a loadable configuration.
    pub fn truth(&self) -> WarpConfig {
        WarpConfig {
            grid: GridConfig {
                rows: self.rows,
                cols: self.cols,
            },
            frame: Frame {
                width: self.width,
                height: self.height,
                normalized: self.normalized,
            },
            theta: self.theta_star.as_slice().to_vec(),
            kernel: KernelConfig {
                family: KernelFamily::Wendland31,
                alpha_hat: Some(self.alpha_hat_star),
                lambda_alpha: self.lambda_alpha,
            },
            with_affine: Some(false),
            lambda_reg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub source: ImageBuffer,
    pub target: ImageBuffer,
    pub truth: WarpConfig,
}

/// Smooth checkerboard with seeded colors; edges are a few pixels wide so
/// the image gradient is informative everywhere near a boundary.
fn checker(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Result<ImageBuffer> {
    let cell = (width.min(height) as f64 / 6.0).max(4.0);
    let sharpness = cell / 4.0;
    let dark: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.1..0.3));
    let light: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.7..0.9));
    let phase = (rng.gen_range(0.0..cell), rng.gen_range(0.0..cell));
    ImageBuffer::from_fn(width, height, 3, |x, y, px| {
        let u = std::f64::consts::PI * (x as f64 + phase.0) / cell;
        let v = std::f64::consts::PI * (y as f64 + phase.1) / cell;
        let t = 0.5 + 0.5 * (sharpness * u.sin() * v.sin()).tanh();
        for k in 0..3 {
            px[k] = dark[k] + (light[k] - dark[k]) * t;
        }
    })
}

/// Adds a few colored Gaussian blobs, alpha-blended over the checker.
fn add_blobs(image: &ImageBuffer, rng: &mut ChaCha8Rng) -> Result<ImageBuffer> {
    let (w, h) = (image.width() as f64, image.height() as f64);
    let blobs: Vec<(f64, f64, f64, [f64; 3])> = (0..3)
        .map(|_| {
            let cx = rng.gen_range(0.25 * w..0.75 * w);
            let cy = rng.gen_range(0.25 * h..0.75 * h);
            let sigma = rng.gen_range(0.06..0.12) * w.min(h);
            let color = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
            (cx, cy, sigma, color)
        })
        .collect();
    ImageBuffer::from_fn(image.width(), image.height(), 3, |x, y, px| {
        px.copy_from_slice(image.pixel(x, y));
        for &(cx, cy, sigma, color) in &blobs {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            let a = 0.8 * (-d2 / (2.0 * sigma * sigma)).exp();
            for k in 0..3 {
                px[k] = (1.0 - a) * px[k] + a * color[k];
            }
        }
    })
}

/// Textured source, and target = source backward-warped by the Wendland
/// warp `(θ*, α̂*)` with a clamped border.
pub fn make_synthetic_pair(spec: &SyntheticSpec) -> Result<SyntheticPair> {
    if spec.width < 32 || spec.height < 32 {
        return Err(Error::domain(format!(
            "synthetic images need both sides >= 32, got {}x{}",
            spec.width, spec.height
        )));
    }
    let truth = spec.truth();
    truth.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base = checker(spec.width, spec.height, &mut rng)?;
    let source = match spec.pattern {
        Pattern::Checker => base,
        Pattern::CheckerBlob => add_blobs(&base, &mut rng)?,
    };
    let (_, model) = truth.build()?;
    let field = model.evaluate_field(&spec.frame()?);
    let target = backward_warp(&source, &field, Border::Clamp)?;
    Ok(SyntheticPair { source, target, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_theta_gives_identical_images() {
        let spec = SyntheticSpec::new(64, 48, Pattern::CheckerBlob, SyntheticPreset::Identity, 3).unwrap();
        let pair = make_synthetic_pair(&spec).unwrap();
        assert_eq!(pair.source, pair.target);
    }

    #[test]
    fn same_seed_same_pair() {
        let spec = SyntheticSpec::new(64, 48, Pattern::CheckerBlob, SyntheticPreset::Random { amplitude: 0.1 }, 9)
            .unwrap();
        assert_eq!(make_synthetic_pair(&spec).unwrap(), make_synthetic_pair(&spec).unwrap());
        let other = SyntheticSpec { seed: 10, ..spec.clone() };
        assert_ne!(make_synthetic_pair(&spec).unwrap().source, make_synthetic_pair(&other).unwrap().source);
    }

    #[test]
    fn rejects_small_images() {
        let spec = SyntheticSpec::new(64, 48, Pattern::Checker, SyntheticPreset::Identity, 0).unwrap();
        let small = SyntheticSpec { width: 31, ..spec };
        assert!(make_synthetic_pair(&small).is_err());
    }

    #[test]
    fn single_preset_moves_the_center() {
        let frame = Frame::normalized(128, 96).unwrap();
        let t = preset_theta(SyntheticPreset::Single, 5, 5, &frame, 0);
        assert_eq!(t.as_slice()[12], Vec2::new(0.15, 0.0));
        assert_eq!(t.as_slice().iter().filter(|d| **d != Vec2::ZERO).count(), 1);
    }

    #[test]
    fn random_preset_keeps_border_fixed() {
        let frame = Frame::normalized(128, 96).unwrap();
        let t = preset_theta(SyntheticPreset::Random { amplitude: 0.1 }, 5, 5, &frame, 4);
        for r in 0..5 {
            for c in 0..5 {
                let d = t.as_slice()[r * 5 + c];
                if r == 0 || c == 0 || r == 4 || c == 4 {
                    assert_eq!(d, Vec2::ZERO);
                } else {
                    assert!(d.x.abs() <= 0.1 && d.y.abs() <= 0.1 && d != Vec2::ZERO);
                }
            }
        }
    }
}
