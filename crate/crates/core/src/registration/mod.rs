//! Intensity-based registration: choose θ and α so the warped source matches
//! the target under a mean L1 objective.
//!
//! The support radius is parameterized as `α = λ_α·σ(s) + D`, so every
//! iterate satisfies `α ≥ D`. The L1 objective is optimized through its
//! Charbonnier surrogate `√(r² + ε²)`; reported losses are always the plain
//! mean absolute residual.

mod adam;
mod compare;
mod loss;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::control_grid::{make_grid, Displacements, Frame, SupportPolicy};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::image_ops::{backward_warp, l1_distance, ssim, Border, ImageBuffer};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::warp::WarpModel;

pub use compare::{compare_kernels, locality_statistic, ComparisonReport, KernelRun};
pub use loss::{loss_and_grad, LossGrad};
pub use synthetic::{make_synthetic_pair, preset_theta, Pattern, SyntheticPair, SyntheticPreset, SyntheticSpec};

use adam::Adam;
use loss::Problem;

/// Smallest pyramid level side length.
const MIN_LEVEL_SIDE: usize = 12;
/// Keeps σ(s) strictly inside (0, 1) in floating point.
const LOGIT_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistrationConfig {
    pub rows: usize,
    pub cols: usize,
    pub kernel: KernelFamily,
    pub optimize_alpha: bool,
    /// Initial (or, with `optimize_alpha` off, fixed) value of α̂.
    pub alpha_hat_init: f64,
    pub lambda_alpha: f64,
    /// Optimizer iterations per pyramid level.
    pub iterations: usize,
    /// Step size in normalized units; scaled by the half-extent in the pixel frame.
    pub step_size: f64,
    pub levels: usize,
    pub charbonnier_eps: f64,
    pub lambda_reg: f64,
    /// Defaults to on for the thin-plate kernel and off for Wendland.
    pub with_affine: Option<bool>,
    pub normalized: bool,
    pub border: Border,
    pub seed: u64,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        RegistrationConfig {
            rows: 5,
            cols: 5,
            kernel: KernelFamily::Wendland31,
            optimize_alpha: true,
            alpha_hat_init: 0.3,
            lambda_alpha: SupportPolicy::DEFAULT_LAMBDA_ALPHA,
            iterations: 200,
            step_size: 0.05,
            levels: 3,
            charbonnier_eps: 1e-3,
            lambda_reg: 0.0,
            with_affine: None,
            normalized: true,
            border: Border::Clamp,
            seed: 0,
        }
    }
}

impl RegistrationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.rows < 2 || self.cols < 2 {
            return bad(format!("grid must be at least 2x2, got {}x{}", self.rows, self.cols));
        }
        if self.iterations < 1 {
            return bad("iterations must be >= 1".into());
        }
        if self.levels < 1 {
            return bad("levels must be >= 1".into());
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad(format!("step_size must be > 0, got {}", self.step_size));
        }
        if !(self.alpha_hat_init > 0.0 && self.alpha_hat_init < 1.0) {
            return bad(format!("alpha_hat_init must lie in (0, 1), got {}", self.alpha_hat_init));
        }
        if !(self.lambda_alpha.is_finite() && self.lambda_alpha > 0.0) {
            return bad(format!("lambda_alpha must be > 0, got {}", self.lambda_alpha));
        }
        if !(self.charbonnier_eps.is_finite() && self.charbonnier_eps > 0.0) {
            return bad(format!("charbonnier_eps must be > 0, got {}", self.charbonnier_eps));
        }
        if !(self.lambda_reg.is_finite() && self.lambda_reg >= 0.0) {
            return bad(format!("lambda_reg must be >= 0, got {}", self.lambda_reg));
        }
        if self.kernel == KernelFamily::Tps && self.with_affine == Some(false) {
            return Err(Error::contract("the thin-plate kernel requires the affine part"));
        }
        Ok(())
    }

    pub fn effective_affine(&self) -> bool {
        self.with_affine.unwrap_or(self.kernel == KernelFamily::Tps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub l1: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub width: usize,
    pub height: usize,
    pub iterations: usize,
    pub best_l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationResult {
    pub theta: Displacements,
    pub alpha_hat: f64,
    /// Support radius `λ_α·α̂ + D` (`None` for thin-plate runs).
    pub alpha: Option<f64>,
    /// Lower bound `D` on the support radius at full resolution.
    pub delaunay_distance: f64,
    /// Plain mean L1 at every iteration, coarse levels first.
    pub loss_curve: Vec<f64>,
    /// Support radius at every iteration (empty for thin-plate runs).
    pub alpha_curve: Vec<f64>,
    /// Lower bound `D` at every iteration; differs between levels only in the pixel frame.
    pub min_alpha_curve: Vec<f64>,
    pub levels: Vec<LevelSummary>,
    pub metrics: Metrics,
    pub iterations: usize,
    pub frame: Frame,
    pub config: RegistrationConfig,
    pub seed: u64,
}

impl RegistrationResult {
    /// The fitted warp at full resolution.
    pub fn model(&self) -> Result<WarpModel> {
        let grid = make_grid(self.config.rows, self.config.cols, self.frame)?;
        let kernel = match self.alpha {
            Some(a) => KernelSpec::wendland31(a)?,
            None => KernelSpec::Tps,
        };
        WarpModel::fit_grid(&grid, &self.theta, kernel, self.config.effective_affine(), self.config.lambda_reg)
    }

    /// `source` warped by the registered transformation.
    pub fn warp(&self, source: &ImageBuffer) -> Result<ImageBuffer> {
        let field = self.model()?.evaluate_field(&self.frame);
        backward_warp(source, &field, self.config.border)
    }

    /// `iter,loss_true_l1` rows.
    pub fn loss_curve_csv(&self) -> String {
        let mut out = String::from("iter,loss_true_l1\n");
        for (i, v) in self.loss_curve.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result is serializable")
    }
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn pyramid(source: &ImageBuffer, target: &ImageBuffer, levels: usize) -> Result<Vec<(ImageBuffer, ImageBuffer)>> {
    let mut out = vec![(source.clone(), target.clone())];
    while out.len() < levels {
        let (s, t) = out.last().expect("non-empty");
        if s.width() / 2 < MIN_LEVEL_SIDE || s.height() / 2 < MIN_LEVEL_SIDE {
            break;
        }
        let next = (s.downsample2()?, t.downsample2()?);
        out.push(next);
    }
    out.reverse();
    Ok(out)
}

/// Coarse-to-fine registration of `source` onto `target`.
///
/// Each pyramid level runs `cfg.iterations` Adam steps on `(θ, s)` with
/// `α̂ = σ(s)`, starting from the best iterate of the previous level. The
/// best iterate (lowest plain L1) of the finest level is returned.
pub fn register(source: &ImageBuffer, target: &ImageBuffer, cfg: &RegistrationConfig) -> Result<RegistrationResult> {
    cfg.validate()?;
    source.check_same_shape(target, "register")?;
    if source.width().min(source.height()) < 16 {
        return Err(Error::contract(format!(
            "registration needs images of at least 16x16, got {}x{}",
            source.width(),
            source.height()
        )));
    }

    let n = cfg.rows * cfg.cols;
    let mut theta = Displacements::zeros(n);
    let mut s = logit(cfg.alpha_hat_init);
    let mut loss_curve = Vec::new();
    let mut alpha_curve = Vec::new();
    let mut min_alpha_curve = Vec::new();
    let mut summaries = Vec::new();
    let mut prev_frame: Option<Frame> = None;

    let frozen = !(cfg.optimize_alpha && cfg.kernel == KernelFamily::Wendland31);
    let alpha_of = |s: f64| if frozen { cfg.alpha_hat_init } else { sigmoid(s) };
    let levels = pyramid(source, target, cfg.levels)?;
    let finest = levels.len() - 1;
    let mut full_res_d = 0.0;

    for (level, (src, tgt)) in levels.iter().enumerate() {
        let problem = Problem::new(src, tgt, cfg)?;
        if let Some(prev) = prev_frame {
            rescale_theta(&mut theta, &prev, &problem.frame);
        }
        prev_frame = Some(problem.frame);
        full_res_d = problem.policy.min_distance();

        let ((x0, x1), (y0, y1)) = problem.frame.extent();
        let mut lr = Vec::with_capacity(2 * n + 1);
        for _ in 0..n {
            lr.push(cfg.step_size * 0.5 * (x1 - x0));
            lr.push(cfg.step_size * 0.5 * (y1 - y0));
        }
        lr.push(if frozen { 0.0 } else { cfg.step_size });

        let mut params: Vec<f64> = theta
            .as_slice()
            .iter()
            .flat_map(|d| [d.x, d.y])
            .chain([s])
            .collect();
        let mut adam = Adam::new(params.len());
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut grad = vec![0.0; params.len()];

        for iteration in 0..cfg.iterations {
            let current = unpack(&params);
            let alpha_hat = alpha_of(params[2 * n]);
            let eval = problem.evaluate(&current, alpha_hat)?;
            if !eval.loss.is_finite() || !eval.l1.is_finite() {
                return Err(Error::Divergence {
                    level,
                    iteration,
                    loss: eval.loss,
                });
            }
            loss_curve.push(eval.l1);
            min_alpha_curve.push(problem.policy.min_distance());
            if let Some(a) = eval.alpha {
                alpha_curve.push(a);
            }
            if !matches!(best, Some((b, _)) if eval.l1 >= b) {
                best = Some((eval.l1, params.clone()));
            }

            for (j, g) in eval.grad_theta.iter().enumerate() {
                grad[2 * j] = g.x;
                grad[2 * j + 1] = g.y;
            }
            grad[2 * n] = eval.grad_alpha_hat * alpha_hat * (1.0 - alpha_hat);
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence {
                    level,
                    iteration,
                    loss: f64::NAN,
                });
            }
            adam.step(&mut params, &grad, &lr);
            params[2 * n] = params[2 * n].clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
        }

        let (best_l1, best_params) = best.expect("at least one iteration");
        theta = unpack(&best_params);
        s = best_params[2 * n];
        summaries.push(LevelSummary {
            width: src.width(),
            height: src.height(),
            iterations: cfg.iterations,
            best_l1,
        });
        if level == finest {
            break;
        }
    }

    let frame = Frame::new(target.width(), target.height(), cfg.normalized)?;
    let alpha_hat = alpha_of(s);
    let alpha = match cfg.kernel {
        KernelFamily::Tps => None,
        KernelFamily::Wendland31 => Some(SupportPolicy::new(cfg.lambda_alpha, full_res_d)?.clamp(alpha_hat)?),
    };
    let mut result = RegistrationResult {
        theta,
        alpha_hat,
        alpha,
        delaunay_distance: full_res_d,
        loss_curve,
        alpha_curve,
        min_alpha_curve,
        iterations: summaries.iter().map(|l| l.iterations).sum(),
        levels: summaries,
        metrics: Metrics { l1: 0.0, ssim: 0.0 },
        frame,
        config: cfg.clone(),
        seed: cfg.seed,
    };
    let warped = result.warp(source)?;
    result.metrics = Metrics {
        l1: l1_distance(&warped, target)?,
        ssim: ssim(&warped, target)?,
    };
    Ok(result)
}

fn unpack(params: &[f64]) -> Displacements {
    let n = params.len() / 2;
    Displacements::new((0..n).map(|j| Vec2::new(params[2 * j], params[2 * j + 1])).collect())
        .unwrap_or_else(|_| Displacements::zeros(n))
}

/// Normalized offsets are level invariant; pixel offsets scale with the extent.
fn rescale_theta(theta: &mut Displacements, from: &Frame, to: &Frame) {
    if from.normalized && to.normalized {
        return;
    }
    let ((fx0, fx1), (fy0, fy1)) = from.extent();
    let ((tx0, tx1), (ty0, ty1)) = to.extent();
    let (sx, sy) = ((tx1 - tx0) / (fx1 - fx0), (ty1 - ty0) / (fy1 - fy0));
    for d in theta.as_mut_slice() {
        *d = Vec2::new(d.x * sx, d.y * sy);
    }
}
