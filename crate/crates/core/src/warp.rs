//! RBF interpolants mapping control points to their targets.
//!
//! A fitted [`WarpModel`] is the point map
//!
//! ```text
//! f(p) = p + Σᵢ wᵢ ψ(|p - cᵢ|)              (no affine part)
//! f(p) = A p + t + Σᵢ wᵢ ψ(|p - cᵢ|)        (with affine part)
//! ```
//!
//! where the weights solve the interpolation conditions `f(cᵢ) = targetᵢ`.
//! With an affine part the weights also satisfy `Σ wᵢ = 0` and
//! `Σ wᵢ cᵢᵀ = 0`, giving the bordered system
//!
//! ```text
//! [ K   P ] [w]   [targets]
//! [ Pᵀ  0 ] [a] = [   0   ]      P = [1  x  y]
//! ```
//!
//! Warps are backward: `f(p)` is where output pixel `p` samples the source.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::control_grid::{ControlGrid, Frame};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::image_ops::DisplacementField;
use crate::kernels::KernelSpec;

/// Diagonal jitter tried, in order, when the system will not factor.
const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-8, 1e-6];
const RESIDUAL_TOL: f64 = 1e-8;

/// Factored interpolation matrix, kept so parameter derivatives can reuse it.
#[derive(Debug)]
struct SolvedSystem {
    /// Inverse of the (jittered, regularized, possibly bordered) system matrix.
    inverse: DMatrix<f64>,
    jitter: f64,
}

/// A fitted warp. Immutable once built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpModel {
    kernel: KernelSpec,
    centers: Vec<Vec2>,
    coeffs: Vec<Vec2>,
    /// Rows `[a_xx, a_xy, t_x]` and `[a_yx, a_yy, t_y]`.
    affine: Option<[[f64; 3]; 2]>,
    regularization: f64,
    #[serde(skip)]
    system: Option<Arc<SolvedSystem>>,
}

impl PartialEq for WarpModel {
    fn eq(&self, other: &Self) -> bool {
        self.kernel == other.kernel
            && self.centers == other.centers
            && self.coeffs == other.coeffs
            && self.affine == other.affine
            && self.regularization == other.regularization
    }
}

fn kernel_matrix(kernel: &KernelSpec, centers: &[Vec2]) -> DMatrix<f64> {
    let n = centers.len();
    DMatrix::from_fn(n, n, |i, j| kernel.eval(centers[i].distance(centers[j])))
}

fn system_matrix(kernel: &KernelSpec, centers: &[Vec2], with_affine: bool, diag: f64) -> DMatrix<f64> {
    let n = centers.len();
    let m = if with_affine { n + 3 } else { n };
    let mut a = DMatrix::zeros(m, m);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(centers[i].distance(centers[j]));
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a[(i, i)] += diag;
        if with_affine {
            let row = [1.0, centers[i].x, centers[i].y];
            for (k, v) in row.into_iter().enumerate() {
                a[(i, n + k)] = v;
                a[(n + k, i)] = v;
            }
        }
    }
    a
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Solves `A x = rhs` for the symmetric system, escalating diagonal jitter on
/// the kernel block until the factorization succeeds and the residual is small.
fn solve_system(
    kernel: &KernelSpec,
    centers: &[Vec2],
    with_affine: bool,
    lambda_reg: f64,
    rhs: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, SolvedSystem)> {
    let scale = inf_norm(rhs).max(1.0);
    let mut last_failure = String::from("no attempt made");
    for jitter in JITTER_LADDER {
        let a = system_matrix(kernel, centers, with_affine, lambda_reg + jitter);
        let attempt = if with_affine {
            let lu = a.clone().lu();
            lu.solve(rhs).zip(lu.try_inverse())
        } else {
            a.clone()
                .cholesky()
                .map(|ch| (ch.solve(rhs), ch.inverse()))
        };
        let Some((x, inverse)) = attempt else {
            last_failure = format!("factorization failed with jitter {jitter:e}");
            continue;
        };
        let residual = inf_norm(&(&a * &x - rhs));
        if residual.is_finite() && residual <= RESIDUAL_TOL * scale {
            return Ok((x, SolvedSystem { inverse, jitter }));
        }
        last_failure = format!("residual {residual:e} with jitter {jitter:e}");
    }
    Err(Error::Solver(format!(
        "interpolation system is singular ({last_failure})"
    )))
}

/// Fits the interpolant sending each center to its target.
///
/// The thin-plate kernel requires `with_affine`. `lambda_reg` is added to the
/// kernel diagonal; with `0` the fit interpolates exactly.
pub fn fit_interpolant(
    centers: &[Vec2],
    targets: &[Vec2],
    kernel: KernelSpec,
    with_affine: bool,
    lambda_reg: f64,
) -> Result<WarpModel> {
    kernel.validate()?;
    if centers.len() != targets.len() {
        return Err(Error::contract(format!(
            "{} centers but {} targets",
            centers.len(),
            targets.len()
        )));
    }
    if centers.len() < 3 {
        return Err(Error::contract(format!(
            "at least 3 centers are required, got {}",
            centers.len()
        )));
    }
    if kernel == KernelSpec::Tps && !with_affine {
        return Err(Error::contract(
            "the thin-plate kernel is only conditionally positive definite and needs the affine part",
        ));
    }
    if !(lambda_reg.is_finite() && lambda_reg >= 0.0) {
        return Err(Error::domain(format!(
            "lambda_reg must be finite and >= 0, got {lambda_reg}"
        )));
    }
    if let Some(i) = centers.iter().chain(targets).position(|p| !p.is_finite()) {
        return Err(Error::domain(format!("non-finite control point at index {i}")));
    }
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if centers[i] == centers[j] {
                return Err(Error::contract(format!(
                    "centers {i} and {j} coincide at ({}, {})",
                    centers[i].x, centers[i].y
                )));
            }
        }
    }

    let n = centers.len();
    let m = if with_affine { n + 3 } else { n };
    let mut rhs = DMatrix::zeros(m, 2);
    for i in 0..n {
        let v = if with_affine {
            targets[i]
        } else {
            targets[i] - centers[i]
        };
        rhs[(i, 0)] = v.x;
        rhs[(i, 1)] = v.y;
    }

    let (x, system) = solve_system(&kernel, centers, with_affine, lambda_reg, &rhs)?;
    let coeffs = (0..n).map(|i| Vec2::new(x[(i, 0)], x[(i, 1)])).collect();
    let affine = with_affine.then(|| {
        [
            [x[(n + 1, 0)], x[(n + 2, 0)], x[(n, 0)]],
            [x[(n + 1, 1)], x[(n + 2, 1)], x[(n, 1)]],
        ]
    });
    Ok(WarpModel {
        kernel,
        centers: centers.to_vec(),
        coeffs,
        affine,
        regularization: lambda_reg,
        system: Some(Arc::new(system)),
    })
}

/// One center's contribution at a query point.
#[derive(Debug, Clone, Copy)]
struct Term {
    index: usize,
    value: f64,
    dalpha: f64,
}

impl WarpModel {
    /// Fits the model for `grid` displaced by `theta` (targets = base + θ).
    pub fn fit_grid(
        grid: &ControlGrid,
        theta: &crate::control_grid::Displacements,
        kernel: KernelSpec,
        with_affine: bool,
        lambda_reg: f64,
    ) -> Result<Self> {
        let targets = grid.targets(theta)?;
        fit_interpolant(grid.base(), &targets, kernel, with_affine, lambda_reg)
    }

    /// Rebuilds a model from stored parts (e.g. a deserialized document).
    pub fn from_parts(
        kernel: KernelSpec,
        centers: Vec<Vec2>,
        coeffs: Vec<Vec2>,
        affine: Option<[[f64; 3]; 2]>,
        regularization: f64,
    ) -> Result<Self> {
        kernel.validate()?;
        if centers.len() != coeffs.len() {
            return Err(Error::contract(format!(
                "{} centers but {} coefficient pairs",
                centers.len(),
                coeffs.len()
            )));
        }
        Ok(WarpModel {
            kernel,
            centers,
            coeffs,
            affine,
            regularization,
            system: None,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec2] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[Vec2] {
        &self.coeffs
    }

    pub fn affine(&self) -> Option<&[[f64; 3]; 2]> {
        self.affine.as_ref()
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    /// Jitter that was added to the diagonal to make the solve succeed.
    pub fn jitter(&self) -> Option<f64> {
        self.system.as_ref().map(|s| s.jitter)
    }

    fn bordered_len(&self) -> usize {
        self.centers.len() + if self.affine.is_some() { 3 } else { 0 }
    }

    #[inline]
    fn terms(&self, p: Vec2, out: &mut Vec<Term>) {
        out.clear();
        let support = self.kernel.support();
        for (index, &c) in self.centers.iter().enumerate() {
            let r = p.distance(c);
            if matches!(support, Some(alpha) if r >= alpha) {
                continue;
            }
            out.push(Term {
                index,
                value: self.kernel.eval(r),
                dalpha: self.kernel.dalpha(r),
            });
        }
    }

    #[inline]
    fn apply(&self, p: Vec2, terms: &[Term]) -> Vec2 {
        let mut disp = Vec2::ZERO;
        for t in terms {
            disp += self.coeffs[t.index] * t.value;
        }
        match &self.affine {
            None => p + disp,
            Some([ax, ay]) => {
                Vec2::new(
                    ax[0] * p.x + ax[1] * p.y + ax[2],
                    ay[0] * p.x + ay[1] * p.y + ay[2],
                ) + disp
            }
        }
    }

    /// Maps `p` through the warp. For compactly supported kernels only centers
    /// closer than the support radius contribute.
    pub fn evaluate_point(&self, p: Vec2) -> Vec2 {
        let mut terms = Vec::with_capacity(self.centers.len());
        self.terms(p, &mut terms);
        self.apply(p, &terms)
    }

    /// `evaluate_point` at every pixel center of `frame`.
    pub fn evaluate_field(&self, frame: &Frame) -> DisplacementField {
        let mut terms = Vec::with_capacity(self.centers.len());
        let mut data = Vec::with_capacity(frame.pixel_count());
        for y in 0..frame.height {
            for x in 0..frame.width {
                let p = frame.pixel_center(x, y);
                self.terms(p, &mut terms);
                data.push(self.apply(p, &terms));
            }
        }
        DisplacementField::new(*frame, data).expect("finite model yields a finite field")
    }

    /// Factorization reused from the fit, or rebuilt for deserialized models.
    fn system(&self) -> Result<Arc<SolvedSystem>> {
        if let Some(s) = &self.system {
            return Ok(Arc::clone(s));
        }
        let n = self.centers.len();
        let rhs = DMatrix::zeros(self.bordered_len(), 2);
        let (_, system) = solve_system(
            &self.kernel,
            &self.centers,
            self.affine.is_some(),
            self.regularization,
            &rhs,
        )?;
        debug_assert_eq!(system.inverse.nrows(), self.bordered_len().max(n));
        Ok(Arc::new(system))
    }

    /// `(∂K/∂α) w`, one 2-vector per center.
    fn dk_dalpha_w(&self) -> Vec<Vec2> {
        let n = self.centers.len();
        (0..n)
            .map(|i| {
                let mut acc = Vec2::ZERO;
                for j in 0..n {
                    let r = self.centers[i].distance(self.centers[j]);
                    acc += self.coeffs[j] * self.kernel.dalpha(r);
                }
                acc
            })
            .collect()
    }

    /// Accumulator for vector-Jacobian products of the warp with respect to
    /// the target offsets θ and the support radius α.
    pub fn vjp(&self) -> Result<WarpVjp<'_>> {
        let system = self.system()?;
        let m = self.bordered_len();
        Ok(WarpVjp {
            model: self,
            system,
            terms: Vec::with_capacity(self.centers.len()),
            basis_upstream: vec![Vec2::ZERO; m],
            alpha_direct: 0.0,
            last: Vec2::ZERO,
        })
    }

    /// Pulls back per-pixel upstream gradients `∂L/∂field(p)` (frame units)
    /// onto `(∂L/∂θ, ∂L/∂α)`.
    pub fn pullback(&self, frame: &Frame, upstream: &[Vec2]) -> Result<(Vec<Vec2>, f64)> {
        if upstream.len() != frame.pixel_count() {
            return Err(Error::contract(format!(
                "{} upstream gradients for a {}x{} frame",
                upstream.len(),
                frame.width,
                frame.height
            )));
        }
        let mut acc = self.vjp()?;
        for y in 0..frame.height {
            for x in 0..frame.width {
                acc.evaluate(frame.pixel_center(x, y));
                acc.accumulate(upstream[y * frame.width + x]);
            }
        }
        Ok(acc.finish())
    }
}

/// Streaming vector-Jacobian product: call [`WarpVjp::evaluate`] for a point,
/// then [`WarpVjp::accumulate`] with the upstream gradient for that point.
///
/// With `b(p) = [ψ(|p - cᵢ|)ᵢ, 1, x, y]` and `M` the system matrix,
/// `∂f(p)/∂θⱼ = (M⁻¹ b(p))ⱼ` and
/// `∂f(p)/∂α = Σᵢ ∂ψ/∂α wᵢ - (M⁻¹ b(p))ᵀ (∂K/∂α) w`, so both reduce to one
/// solve against `Σₚ b(p) gₚᵀ` at the end.
pub struct WarpVjp<'a> {
    model: &'a WarpModel,
    system: Arc<SolvedSystem>,
    terms: Vec<Term>,
    basis_upstream: Vec<Vec2>,
    alpha_direct: f64,
    last: Vec2,
}

impl WarpVjp<'_> {
    /// Warped position of `p`; remembers the basis for the next `accumulate`.
    pub fn evaluate(&mut self, p: Vec2) -> Vec2 {
        self.model.terms(p, &mut self.terms);
        self.last = p;
        self.model.apply(p, &self.terms)
    }

    pub fn accumulate(&mut self, upstream: Vec2) {
        let n = self.model.centers.len();
        for t in &self.terms {
            self.basis_upstream[t.index] += upstream * t.value;
            self.alpha_direct += upstream.dot(self.model.coeffs[t.index]) * t.dalpha;
        }
        if self.model.affine.is_some() {
            let p = self.last;
            self.basis_upstream[n] += upstream;
            self.basis_upstream[n + 1] += upstream * p.x;
            self.basis_upstream[n + 2] += upstream * p.y;
        }
    }

    /// `(∂L/∂θ, ∂L/∂α)`.
    pub fn finish(self) -> (Vec<Vec2>, f64) {
        let n = self.model.centers.len();
        let m = self.basis_upstream.len();
        let inv = &self.system.inverse;
        let mut grad_theta = vec![Vec2::ZERO; n];
        for (j, g) in grad_theta.iter_mut().enumerate() {
            let mut acc = Vec2::ZERO;
            for k in 0..m {
                acc += self.basis_upstream[k] * inv[(j, k)];
            }
            *g = acc;
        }
        let grad_alpha = if self.model.kernel.support().is_some() {
            let dkw = self.model.dk_dalpha_w();
            let indirect: f64 = grad_theta.iter().zip(&dkw).map(|(g, v)| g.dot(*v)).sum();
            self.alpha_direct - indirect
        } else {
            0.0
        };
        (grad_theta, grad_alpha)
    }
}

/// Dense Jacobians of a rasterized field.
///
/// Moving θⱼ by `(δx, δy)` moves `field(p)` by `weight(p, j) · (δx, δy)`;
/// the two axes decouple with a shared scalar weight.
#[derive(Debug, Clone)]
pub struct FieldJacobians {
    pub frame: Frame,
    pub n_centers: usize,
    /// `weights[pixel * n_centers + j]`
    pub weights: Vec<f64>,
    /// `∂field(p)/∂α` per pixel.
    pub dalpha: Vec<Vec2>,
}

impl FieldJacobians {
    /// Derivative of `field(x, y)` with respect to θⱼ along `axis` (0 = x, 1 = y).
    pub fn dtheta(&self, x: usize, y: usize, j: usize, axis: usize) -> Vec2 {
        let w = self.weights[(y * self.frame.width + x) * self.n_centers + j];
        if axis == 0 {
            Vec2::new(w, 0.0)
        } else {
            Vec2::new(0.0, w)
        }
    }

    pub fn dalpha_at(&self, x: usize, y: usize) -> Vec2 {
        self.dalpha[y * self.frame.width + x]
    }
}

/// Exact Jacobians of every pixel's sampling coordinate with respect to each
/// θ component and α. `grid` must be the lattice the model was fitted on.
pub fn field_jacobians(model: &WarpModel, frame: &Frame, grid: &ControlGrid) -> Result<FieldJacobians> {
    if grid.base() != model.centers() {
        return Err(Error::contract("model centers do not match the control grid"));
    }
    let system = model.system()?;
    let n = model.centers.len();
    let m = model.bordered_len();
    let dkw = model.dk_dalpha_w();
    let mut terms = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(frame.pixel_count() * n);
    let mut dalpha = Vec::with_capacity(frame.pixel_count());
    let mut b = DVector::zeros(m);
    for y in 0..frame.height {
        for x in 0..frame.width {
            let p = frame.pixel_center(x, y);
            model.terms(p, &mut terms);
            b.fill(0.0);
            let mut direct = Vec2::ZERO;
            for t in &terms {
                b[t.index] = t.value;
                direct += model.coeffs[t.index] * t.dalpha;
            }
            if model.affine.is_some() {
                b[n] = 1.0;
                b[n + 1] = p.x;
                b[n + 2] = p.y;
            }
            let g = &system.inverse * &b;
            let mut indirect = Vec2::ZERO;
            for j in 0..n {
                weights.push(g[j]);
                indirect += dkw[j] * g[j];
            }
            dalpha.push(if model.kernel.support().is_some() {
                direct - indirect
            } else {
                Vec2::ZERO
            });
        }
    }
    Ok(FieldJacobians {
        frame: *frame,
        n_centers: n,
        weights,
        dalpha,
    })
}

/// `wₓᵀ K wₓ + w_yᵀ K w_y` for a thin-plate model: the bending energy up to a
/// constant factor.
pub fn bending_energy(model: &WarpModel) -> Result<f64> {
    if model.kernel != KernelSpec::Tps {
        return Err(Error::Unsupported(
            "bending energy is only defined for thin-plate models".into(),
        ));
    }
    let k = kernel_matrix(&model.kernel, &model.centers);
    let wx = DVector::from_iterator(model.coeffs.len(), model.coeffs.iter().map(|w| w.x));
    let wy = DVector::from_iterator(model.coeffs.len(), model.coeffs.iter().map(|w| w.y));
    Ok(wx.dot(&(&k * &wx)) + wy.dot(&(&k * &wy)))
}
