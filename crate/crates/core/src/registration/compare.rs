use serde::{Deserialize, Serialize};

use crate::control_grid::Frame;
use crate::error::Result;
use crate::geometry::Vec2;
use crate::image_ops::ImageBuffer;
use crate::kernels::KernelFamily;
use crate::warp::WarpModel;

use super::{register, Metrics, RegistrationConfig, RegistrationResult};

/// Displacements at or below this magnitude count as "not moved".
const MOVED: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRun {
    pub kernel: KernelFamily,
    pub metrics: Metrics,
    /// Fraction of probe points that move although they lie outside every support disk.
    pub locality: f64,
    pub result: RegistrationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub tps: KernelRun,
    pub wendland31: KernelRun,
    /// Support radius defining the disks for both locality statistics.
    pub alpha: f64,
    /// Width of the probe band added around the image on every side.
    pub probe_margin: f64,
    pub probe_count: usize,
}

/// Fraction of probe points with `|f(p) − p| > 1e−6` that lie at distance
/// `≥ alpha` from every center of `model`.
///
/// Probes are pixel-spaced over the extent of `frame` grown by `margin` on
/// every side. Returns the statistic and the number of probes.
pub fn locality_statistic(model: &WarpModel, frame: &Frame, alpha: f64, margin: f64) -> (f64, usize) {
    let ((x0, x1), (y0, y1)) = frame.extent();
    let step = frame.pixel_size();
    let nx = ((x1 - x0 + 2.0 * margin) / step.x).floor() as usize + 1;
    let ny = ((y1 - y0 + 2.0 * margin) / step.y).floor() as usize + 1;
    let mut moved_outside = 0usize;
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new(x0 - margin + i as f64 * step.x, y0 - margin + j as f64 * step.y);
            let outside = model.centers().iter().all(|c| c.distance(p) >= alpha);
            if outside && (model.evaluate_point(p) - p).norm() > MOVED {
                moved_outside += 1;
            }
        }
    }
    let total = nx * ny;
    (moved_outside as f64 / total as f64, total)
}

/// Registers `source` onto `target` with both kernels and contrasts how far
/// each warp reaches.
///
/// The locality statistic is evaluated for both runs against the support
/// disks of the Wendland run. Since `α ≥ D` covers the whole image, the
/// probe canvas extends `α + D` beyond the image border.
pub fn compare_kernels(
    source: &ImageBuffer,
    target: &ImageBuffer,
    cfg: &RegistrationConfig,
) -> Result<ComparisonReport> {
    let tps_cfg = RegistrationConfig {
        kernel: KernelFamily::Tps,
        with_affine: None,
        ..cfg.clone()
    };
    let wendland_cfg = RegistrationConfig {
        kernel: KernelFamily::Wendland31,
        ..cfg.clone()
    };
    let tps = register(source, target, &tps_cfg)?;
    let wendland = register(source, target, &wendland_cfg)?;
    let alpha = wendland.alpha.expect("Wendland runs report alpha");
    let margin = alpha + wendland.delaunay_distance;

    let run = |r: RegistrationResult| -> Result<(KernelRun, usize)> {
        let (locality, probes) = locality_statistic(&r.model()?, &r.frame, alpha, margin);
        Ok((
            KernelRun {
                kernel: r.config.kernel,
                metrics: r.metrics,
                locality,
                result: r,
            },
            probes,
        ))
    };
    let (tps, probe_count) = run(tps)?;
    let (wendland31, _) = run(wendland)?;
    Ok(ComparisonReport {
        tps,
        wendland31,
        alpha,
        probe_margin: margin,
        probe_count,
    })
}
