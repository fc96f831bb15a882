//! Radial basis functions used as warp kernels.
//!
//! Two families are supported:
//!
//! * the thin-plate spline kernel `U(r) = r² ln r`, globally supported and
//!   only conditionally positive definite (it needs an affine side block);
//! * Wendland's `ψ_{3,1}` function scaled to a support radius `α`:
//!
//! ```text
//! ψ_α(r) = (1 - r/α)⁴₊ (4r/α + 1)
//! ```
//!
//! which is `1` at the origin and exactly zero for `r ≥ α`.
//!
//! [`wendland_via_integral`] rebuilds the Wendland family from its defining
//! integral recursion by quadrature. It is slow and exists to cross-check the
//! closed form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Tps,
    Wendland31,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Tps => "tps",
            KernelFamily::Wendland31 => "wendland31",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tps" => Ok(KernelFamily::Tps),
            "wendland31" => Ok(KernelFamily::Wendland31),
            other => Err(Error::domain(format!(
                "unknown kernel family `{other}` (expected `tps` or `wendland31`)"
            ))),
        }
    }
}

/// A kernel family together with its support radius.
///
/// Construct Wendland kernels with [`KernelSpec::wendland31`], which rejects
/// non-positive radii; evaluation methods assume a valid spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    Tps,
    Wendland31 { alpha: f64 },
}

impl KernelSpec {
    pub fn wendland31(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(KernelSpec::Wendland31 { alpha })
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Tps => KernelFamily::Tps,
            KernelSpec::Wendland31 { .. } => KernelFamily::Wendland31,
        }
    }

    /// Support radius, `None` for globally supported kernels.
    pub fn support(&self) -> Option<f64> {
        match *self {
            KernelSpec::Tps => None,
            KernelSpec::Wendland31 { alpha } => Some(alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Tps => Ok(()),
            KernelSpec::Wendland31 { alpha } => check_alpha(alpha),
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Tps => tps(r),
            KernelSpec::Wendland31 { alpha } => wendland31(r, alpha),
        }
    }

    /// `dψ/dr`.
    #[inline]
    pub fn dr(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Tps => tps_dr(r),
            KernelSpec::Wendland31 { alpha } => wendland31_dr(r, alpha),
        }
    }

    /// `∂ψ/∂α`; identically zero for the thin-plate kernel.
    #[inline]
    pub fn dalpha(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Tps => 0.0,
            KernelSpec::Wendland31 { alpha } => wendland31_dalpha(r, alpha),
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("radius must be finite and >= 0, got {r}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "support radius alpha must be finite and > 0, got {alpha}"
        )))
    }
}

#[inline]
fn tps(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

#[inline]
fn tps_dr(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * (2.0 * r.ln() + 1.0)
    }
}

#[inline]
fn wendland31(r: f64, alpha: f64) -> f64 {
    let s = r / alpha;
    if s >= 1.0 {
        return 0.0;
    }
    let t = 1.0 - s;
    let t2 = t * t;
    t2 * t2 * (4.0 * s + 1.0)
}

#[inline]
fn wendland31_dr(r: f64, alpha: f64) -> f64 {
    let s = r / alpha;
    if s >= 1.0 {
        return 0.0;
    }
    let t = 1.0 - s;
    -20.0 * r / (alpha * alpha) * t * t * t
}

#[inline]
fn wendland31_dalpha(r: f64, alpha: f64) -> f64 {
    let s = r / alpha;
    if s >= 1.0 {
        return 0.0;
    }
    let t = 1.0 - s;
    20.0 * r * r / (alpha * alpha * alpha) * t * t * t
}

/// Thin-plate kernel `r² ln r`, continuously extended by `0` at the origin.
pub fn eval_tps(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(tps(r))
}

/// Wendland `ψ_{3,1}` with support radius `alpha`, normalized to `1` at `r = 0`.
pub fn eval_wendland31(r: f64, alpha: f64) -> Result<f64> {
    check_radius(r)?;
    check_alpha(alpha)?;
    Ok(wendland31(r, alpha))
}

/// Radial derivative `dψ/dr` of the given kernel.
pub fn kernel_dr(spec: &KernelSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    spec.validate()?;
    Ok(spec.dr(r))
}

/// Derivative of the Wendland kernel with respect to its support radius.
pub fn kernel_dalpha(r: f64, alpha: f64) -> Result<f64> {
    check_radius(r)?;
    check_alpha(alpha)?;
    Ok(wendland31_dalpha(r, alpha))
}

/// Builds `ψ_{d,k}(r) = I^k (1 - r)₊^{⌊d/2⌋+k+1}` numerically, where
/// `I f(r) = ∫_r^∞ t f(t) dt`. The result is not normalized.
///
/// All intermediate functions vanish for `t ≥ 1`, so every integral runs over
/// `[r, 1]` on a uniform lattice of `quad_steps` intervals (rounded up to an
/// even count). The outermost application uses composite Simpson; inner
/// applications are tabulated at every lattice node with a third-order
/// cumulative rule.
pub fn wendland_via_integral(d: u32, k: u32, r: f64, quad_steps: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::domain(format!("dimension d must be >= 1, got {d}")));
    }
    if k < 1 {
        return Err(Error::domain(format!("smoothness k must be >= 1, got {k}")));
    }
    if quad_steps < 100 {
        return Err(Error::domain(format!(
            "quad_steps must be >= 100, got {quad_steps}"
        )));
    }
    check_radius(r)?;
    if r >= 1.0 {
        return Ok(0.0);
    }

    let n = quad_steps + quad_steps % 2;
    let h = (1.0 - r) / n as f64;
    let node = |j: usize| if j == n { 1.0 } else { r + j as f64 * h };
    let exponent = (d / 2 + k + 1) as i32;

    let mut values: Vec<f64> = (0..=n).map(|j| (1.0 - node(j)).powi(exponent)).collect();
    let mut integrand = vec![0.0; n + 1];

    for _ in 1..k {
        for (j, u) in integrand.iter_mut().enumerate() {
            *u = node(j) * values[j];
        }
        // values[j] <- ∫_{t_j}^1 integrand, accumulated from the top.
        values[n] = 0.0;
        values[n - 1] = h / 12.0 * (-integrand[n - 2] + 8.0 * integrand[n - 1] + 5.0 * integrand[n]);
        for j in (0..n - 1).rev() {
            let piece = h / 12.0 * (5.0 * integrand[j] + 8.0 * integrand[j + 1] - integrand[j + 2]);
            values[j] = values[j + 1] + piece;
        }
    }

    let mut sum = 0.0;
    for j in 0..=n {
        let weight = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += weight * node(j) * values[j];
    }
    Ok(sum * h / 3.0)
}

/// [`wendland_via_integral`] divided by its value at the origin.
pub fn wendland_via_integral_normalized(d: u32, k: u32, r: f64, quad_steps: usize) -> Result<f64> {
    let origin = wendland_via_integral(d, k, 0.0, quad_steps)?;
    Ok(wendland_via_integral(d, k, r, quad_steps)? / origin)
}
