use crate::control_grid::{ControlGrid, Displacements, Frame, SupportPolicy};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::image_ops::{bilinear_sample_grad, ImageBuffer};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::warp::{fit_interpolant, WarpModel};

use super::RegistrationConfig;

/// Loss value and gradients at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    /// Charbonnier-smoothed mean absolute residual (the optimized quantity).
    pub loss: f64,
    /// Plain mean absolute residual.
    pub l1: f64,
    pub grad_theta: Vec<Vec2>,
    /// `∂loss/∂α̂`, zero for the thin-plate kernel.
    pub grad_alpha_hat: f64,
    /// Support radius the loss was evaluated at (`None` for thin-plate).
    pub alpha: Option<f64>,
}

/// One image pair on one frame, ready for repeated evaluation.
pub(crate) struct Problem<'a> {
    pub source: &'a ImageBuffer,
    pub target: &'a ImageBuffer,
    pub frame: Frame,
    pub grid: ControlGrid,
    pub policy: SupportPolicy,
    pub family: KernelFamily,
    pub with_affine: bool,
    pub lambda_reg: f64,
    pub eps: f64,
    pub border: crate::image_ops::Border,
}

impl<'a> Problem<'a> {
    pub fn new(source: &'a ImageBuffer, target: &'a ImageBuffer, cfg: &RegistrationConfig) -> Result<Self> {
        source.check_same_shape(target, "registration")?;
        cfg.validate()?;
        let frame = Frame::new(target.width(), target.height(), cfg.normalized)?;
        let grid = crate::control_grid::make_grid(cfg.rows, cfg.cols, frame)?;
        let policy = SupportPolicy::for_grid(&grid, cfg.lambda_alpha)?;
        Ok(Problem {
            source,
            target,
            frame,
            grid,
            policy,
            family: cfg.kernel,
            with_affine: cfg.effective_affine(),
            lambda_reg: cfg.lambda_reg,
            eps: cfg.charbonnier_eps,
            border: cfg.border,
        })
    }

    pub fn kernel(&self, alpha_hat: f64) -> Result<KernelSpec> {
        match self.family {
            KernelFamily::Tps => Ok(KernelSpec::Tps),
            KernelFamily::Wendland31 => KernelSpec::wendland31(self.policy.clamp(alpha_hat)?),
        }
    }

    pub fn model(&self, theta: &Displacements, alpha_hat: f64) -> Result<WarpModel> {
        let targets = self.grid.targets(theta)?;
        fit_interpolant(self.grid.base(), &targets, self.kernel(alpha_hat)?, self.with_affine, self.lambda_reg)
    }

    pub fn evaluate(&self, theta: &Displacements, alpha_hat: f64) -> Result<LossGrad> {
        let model = self.model(theta, alpha_hat)?;
        let src_frame = self.frame.with_size(self.source.width(), self.source.height());
        // d(pixel index)/d(frame coordinate)
        let scale = {
            let s = src_frame.pixel_size();
            Vec2::new(1.0 / s.x, 1.0 / s.y)
        };
        let c = self.source.channels();
        let count = (self.frame.pixel_count() * c) as f64;
        let mut vals = vec![0.0; c];
        let mut grads = vec![Vec2::ZERO; c];
        let mut loss = 0.0;
        let mut l1 = 0.0;
        let mut acc = model.vjp()?;
        for y in 0..self.frame.height {
            for x in 0..self.frame.width {
                let q = acc.evaluate(self.frame.pixel_center(x, y));
                bilinear_sample_grad(self.source, src_frame.to_pixel(q), self.border, &mut vals, &mut grads);
                let want = self.target.pixel(x, y);
                let mut g = Vec2::ZERO;
                for k in 0..c {
                    let r = vals[k] - want[k];
                    let s = (r * r + self.eps * self.eps).sqrt();
                    loss += s;
                    l1 += r.abs();
                    g += grads[k] * (r / s);
                }
                acc.accumulate(Vec2::new(g.x * scale.x, g.y * scale.y) * (1.0 / count));
            }
        }
        let (grad_theta, grad_alpha) = acc.finish();
        let alpha = model.kernel().support();
        let grad_alpha_hat = match alpha {
            Some(_) => grad_alpha * self.policy.lambda_alpha(),
            None => 0.0,
        };
        Ok(LossGrad {
            loss: loss / count,
            l1: l1 / count,
            grad_theta,
            grad_alpha_hat,
            alpha,
        })
    }
}

/// Smoothed L1 between the warped `source` and `target`, with exact gradients
/// with respect to the control offsets θ and the support parameter `α̂`.
pub fn loss_and_grad(
    source: &ImageBuffer,
    target: &ImageBuffer,
    theta: &Displacements,
    alpha_hat: f64,
    cfg: &RegistrationConfig,
) -> Result<LossGrad> {
    if !(alpha_hat > 0.0 && alpha_hat < 1.0) {
        return Err(Error::domain(format!("alpha_hat must lie in (0, 1), got {alpha_hat}")));
    }
    let problem = Problem::new(source, target, cfg)?;
    theta.check_len(problem.grid.len())?;
    problem.evaluate(theta, alpha_hat)
}
