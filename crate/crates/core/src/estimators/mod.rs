//! A posteriori residuals for rational surrogates of affine parametric problems.
//!
//! The full-order problem is `F(μ) u = f(μ)` with
//! `F(μ) = Σ θ_i^F(μ) F_i` and `f(μ) = Σ θ_i^f(μ) f_i`. Three ways of getting
//! `‖F(μ) ũ(μ) − f(μ)‖_W` for the surrogate `ũ = I(uQ)/Q` are provided:
//!
//! - [`residual_direct`]: assemble `F(μ)`, apply it to `ũ(μ)`;
//! - [`residual_separable`]: the affine decomposition in terms of interpolation
//!   errors `Δ(g) = g − I(g)` of `θ_i I(uQ)` and `θ_i Q`, which only needs
//!   node values (requires the snapshots to solve the problem exactly);
//! - [`LinearEstimator`]: for `F(μ) = F0 + μ F1` and constant `f`, the residual is
//!   exactly `‖F1 Σ_j u(μ_j) Q(μ_j)/ω'(μ_j)‖_W · |ω(μ)/Q(μ)|`.
//!
//! [`CalibratedEstimator`] uses the same `|ω/Q|` profile with a constant fitted
//! from one exact residual, which is a heuristic for non-linear dependence on `μ`.

mod greedy;

use alloc::sync::Arc;
use core::fmt;

pub use greedy::{greedy_refine, GreedyOptions, GreedyOutcome, GreedyStep};

use crate::linalg::{self, c};
use crate::polybasis::PolyCoeffs;
use crate::prelude::*;
use crate::rational::{EvalStatus, RationalInterpolant, NODE_TOL, POLE_TOL};
use crate::sampling::SampleSet;
use crate::snapshots::InnerProduct;

/// Scalar coefficient function `θ(μ)`.
pub type Theta = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// `F(μ) = Σ θ_i^F(μ) F_i`, `f(μ) = Σ θ_i^f(μ) f_i`.
#[derive(Clone)]
pub struct AffineOperator {
    op_thetas: Vec<Theta>,
    ops: Vec<CMat>,
    rhs_thetas: Vec<Theta>,
    rhs: Vec<CVec>,
    linear_in_mu: bool,
}

impl fmt::Debug for AffineOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineOperator")
            .field("dim", &self.dim())
            .field("operator_terms", &self.ops.len())
            .field("rhs_terms", &self.rhs.len())
            .field("linear_in_mu", &self.linear_in_mu)
            .finish()
    }
}

impl AffineOperator {
    /// General separable operator.
    pub fn new(op_terms: Vec<(Theta, CMat)>, rhs_terms: Vec<(Theta, CVec)>) -> Result<Self> {
        let (op_thetas, ops): (Vec<_>, Vec<_>) = op_terms.into_iter().unzip();
        let (rhs_thetas, rhs): (Vec<_>, Vec<_>) = rhs_terms.into_iter().unzip();
        let out = AffineOperator { op_thetas, ops, rhs_thetas, rhs, linear_in_mu: false };
        out.validate()?;
        Ok(out)
    }

    /// `F(μ) = F0 + μ F1`, constant right-hand side.
    pub fn linear(f0: CMat, f1: CMat, f: CVec) -> Result<Self> {
        let mut out = Self::polynomial(vec![f0, f1], f)?;
        out.linear_in_mu = true;
        Ok(out)
    }

    /// `F(μ) = Σ_i μ^i F_i`, constant right-hand side.
    pub fn polynomial(ops: Vec<CMat>, f: CVec) -> Result<Self> {
        let op_terms = ops
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                let k = i as i32;
                let theta: Theta = Arc::new(move |mu: C64| mu.powi(k));
                (theta, m)
            })
            .collect();
        let one: Theta = Arc::new(|_| c(1.0, 0.0));
        let mut out = Self::new(op_terms, vec![(one, f)])?;
        out.linear_in_mu = out.ops.len() == 2;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let n = match (self.ops.first(), self.rhs.first()) {
            (Some(m), _) => m.nrows(),
            (None, _) => return Err(Error::InvalidArgument("operator needs at least one term")),
        };
        for m in &self.ops {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
            }
        }
        for f in &self.rhs {
            if f.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: f.len() });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn is_linear_in_mu(&self) -> bool {
        self.linear_in_mu
    }

    pub fn operator_terms(&self) -> &[CMat] {
        &self.ops
    }

    pub fn rhs_terms(&self) -> &[CVec] {
        &self.rhs
    }

    /// `F1` of a linear-in-`μ` operator.
    pub fn linear_part(&self) -> Option<&CMat> {
        if self.linear_in_mu {
            self.ops.get(1)
        } else {
            None
        }
    }

    /// Assembled `F(μ)`.
    pub fn matrix(&self, mu: C64) -> CMat {
        let n = self.dim();
        let mut out = CMat::zeros(n, n);
        for (theta, m) in self.op_thetas.iter().zip(&self.ops) {
            out += m * theta(mu);
        }
        out
    }

    /// Assembled `f(μ)`.
    pub fn rhs(&self, mu: C64) -> CVec {
        let mut out = CVec::zeros(self.dim());
        for (theta, f) in self.rhs_thetas.iter().zip(&self.rhs) {
            out.axpy(theta(mu), f, c(1.0, 0.0));
        }
        out
    }

    /// `F(μ) u − f(μ)`.
    pub fn residual_vector(&self, mu: C64, u: &CVec) -> Result<CVec> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        let mut out = -self.rhs(mu);
        for (theta, m) in self.op_thetas.iter().zip(&self.ops) {
            out += (m * u) * theta(mu);
        }
        Ok(out)
    }

    /// Dense direct solve of `F(μ) u = f(μ)`.
    pub fn solve(&self, mu: C64) -> Result<CVec> {
        linalg::lu_solve(self.matrix(mu), &self.rhs(mu))
    }
}

/// A residual norm together with how the surrogate behaved at that point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub norm: f64,
    pub status: EvalStatus,
}

fn check_dims(op: &AffineOperator, interp: &RationalInterpolant, res_inner: &InnerProduct) -> Result<()> {
    let n = op.dim();
    if interp.snapshots().nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: interp.snapshots().nrows() });
    }
    if res_inner.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: res_inner.dim() });
    }
    Ok(())
}

/// `‖F(μ) ũ(μ) − f(μ)‖_W` by direct assembly.
pub fn residual_direct(
    op: &AffineOperator,
    interp: &RationalInterpolant,
    mu: C64,
    res_inner: &InnerProduct,
) -> Result<Residual> {
    check_dims(op, interp, res_inner)?;
    let ev = interp.evaluate(mu);
    let r = op.residual_vector(mu, &ev.value)?;
    Ok(Residual { norm: res_inner.norm(&r)?, status: ev.status })
}

/// Residual through its affine decomposition:
///
/// ```text
/// Q(μ) (F(μ)ũ(μ) − f(μ)) = Σ_i F_i Δ(θ_i^F I(uQ))(μ) − Σ_i Δ(θ_i^f Q)(μ) f_i
/// ```
///
/// Only node values of `u` and `Q` enter. Equal to [`residual_direct`] whenever the
/// snapshots solve the full-order problem; zero at the nodes by construction.
pub fn residual_separable(
    op: &AffineOperator,
    interp: &RationalInterpolant,
    mu: C64,
    res_inner: &InnerProduct,
) -> Result<Residual> {
    check_dims(op, interp, res_inner)?;
    let samples = interp.samples();
    if let Some(j) = samples.nearest_node_within(mu, NODE_TOL * samples.scale()) {
        return Ok(Residual { norm: 0.0, status: EvalStatus::Node(j) });
    }
    let qmu = interp.denominator_eval(mu);
    let omega = samples.nodal_poly_eval(mu);
    // Lagrange basis values ℓ_j(μ) = ω(μ) / ((μ − μ_j) ω'(μ_j))
    let lagrange: Vec<C64> = samples
        .nodes()
        .iter()
        .zip(samples.omega_prime())
        .map(|(&node, &wp)| omega / ((mu - node) * wp))
        .collect();
    let qnode = interp.qnode();
    let snaps = interp.snapshots();
    let mut total = CVec::zeros(op.dim());
    for (theta, fi) in op.op_thetas.iter().zip(&op.ops) {
        let t_mu = theta(mu);
        let coef = CVec::from_iterator(
            samples.len(),
            samples.nodes().iter().zip(&lagrange).zip(qnode).map(|((&node, &l), &q)| l * (t_mu - theta(node)) * q),
        );
        total += fi * (snaps * coef);
    }
    for (theta, f) in op.rhs_thetas.iter().zip(&op.rhs) {
        let interp_part: C64 = samples
            .nodes()
            .iter()
            .zip(&lagrange)
            .zip(qnode)
            .map(|((&node, &l), &q)| l * theta(node) * q)
            .sum();
        let delta = theta(mu) * qmu - interp_part;
        total.axpy(-delta, f, c(1.0, 0.0));
    }
    let qscale = qnode.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let status = if qmu.norm() < POLE_TOL * qscale { EvalStatus::NearPole } else { EvalStatus::Regular };
    let norm = res_inner.norm(&total)? / qmu.norm();
    Ok(Residual { norm, status })
}

/// `|ω(μ)/Q(μ)|`, the profile shared by the linear and calibrated estimators.
#[derive(Debug, Clone)]
struct OmegaOverQ {
    samples: SampleSet,
    denominator: PolyCoeffs,
    qscale: f64,
}

impl OmegaOverQ {
    fn new(interp: &RationalInterpolant) -> Self {
        let qscale = interp.qnode().iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        OmegaOverQ { samples: interp.samples().clone(), denominator: interp.denominator().clone(), qscale }
    }

    fn eval(&self, mu: C64) -> (f64, EvalStatus) {
        if let Some(j) = self.samples.nearest_node_within(mu, NODE_TOL * self.samples.scale()) {
            return (0.0, EvalStatus::Node(j));
        }
        let q = self.denominator.eval(mu);
        let status = if q.norm() < POLE_TOL * self.qscale { EvalStatus::NearPole } else { EvalStatus::Regular };
        let log_ratio = self.samples.log_abs_nodal(mu) - q.norm().ln();
        (log_ratio.exp(), status)
    }
}

/// Exact residual for `F(μ) = F0 + μ F1` with constant right-hand side.
///
/// The constant `‖F1 Σ_j u(μ_j) Q(μ_j)/ω'(μ_j)‖_W` is computed once; each
/// evaluation then costs two scalar polynomial evaluations.
#[derive(Debug, Clone)]
pub struct LinearEstimator {
    constant: f64,
    profile: OmegaOverQ,
}

impl LinearEstimator {
    pub fn new(op: &AffineOperator, interp: &RationalInterpolant, res_inner: &InnerProduct) -> Result<Self> {
        check_dims(op, interp, res_inner)?;
        let f1 = op.linear_part().ok_or(Error::NotLinearInMu)?;
        if op.rhs_thetas.len() != 1 || op.rhs_thetas[0](c(0.0, 0.0)) != op.rhs_thetas[0](c(1.0, 1.0)) {
            return Err(Error::NotLinearInMu);
        }
        let lead = interp.leading_coefficient();
        let constant = res_inner.norm(&(f1 * lead))?;
        Ok(LinearEstimator { constant, profile: OmegaOverQ::new(interp) })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn estimate(&self, mu: C64) -> Residual {
        let (ratio, status) = self.profile.eval(mu);
        Residual { norm: self.constant * ratio, status }
    }
}

/// `C |ω(μ)/Q(μ)|` with `C` fitted from one exact residual.
#[derive(Debug, Clone)]
pub struct CalibratedEstimator {
    constant: f64,
    profile: OmegaOverQ,
}

impl CalibratedEstimator {
    pub fn with_constant(interp: &RationalInterpolant, constant: f64) -> Self {
        CalibratedEstimator { constant, profile: OmegaOverQ::new(interp) }
    }

    /// Fits `C` from the exact residual at `mu_prime`.
    pub fn calibrate(
        op: &AffineOperator,
        interp: &RationalInterpolant,
        mu_prime: C64,
        res_inner: &InnerProduct,
    ) -> Result<Self> {
        let constant = calibrate(op, interp, mu_prime, res_inner)?;
        Ok(Self::with_constant(interp, constant))
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn estimate(&self, mu: C64) -> Residual {
        let (ratio, status) = self.profile.eval(mu);
        Residual { norm: self.constant * ratio, status }
    }
}

/// `C = ‖F(μ')ũ(μ') − f(μ')‖_W · |Q(μ')/ω(μ')|`.
pub fn calibrate(op: &AffineOperator, interp: &RationalInterpolant, mu_prime: C64, res_inner: &InnerProduct) -> Result<f64> {
    let profile = OmegaOverQ::new(interp);
    let (ratio, status) = profile.eval(mu_prime);
    match status {
        EvalStatus::Node(j) => return Err(Error::NodePoint(j)),
        EvalStatus::NearPole => return Err(Error::AtPole),
        EvalStatus::Regular => {}
    }
    let r = residual_direct(op, interp, mu_prime, res_inner)?;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::AtPole);
    }
    Ok(r.norm / ratio)
}

/// Calibrates at the candidate whose `|ω/Q|` is the median over the regular,
/// non-node candidates, moving outward from the median if that point fails.
pub fn calibrate_at_median(
    op: &AffineOperator,
    interp: &RationalInterpolant,
    candidates: &[C64],
    res_inner: &InnerProduct,
) -> Result<(C64, CalibratedEstimator)> {
    let profile = OmegaOverQ::new(interp);
    let mut ranked: Vec<(f64, C64)> = candidates
        .iter()
        .map(|&mu| (profile.eval(mu), mu))
        .filter(|((r, status), _)| *status == EvalStatus::Regular && r.is_finite() && *r > 0.0)
        .map(|((r, _), mu)| (r, mu))
        .collect();
    if ranked.is_empty() {
        return Err(Error::EmptyApprox);
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let len = ranked.len() as isize;
    let mid = len / 2;
    // mid, mid − 1, mid + 1, mid − 2, …
    let order = (0..2 * len).map(|k| if k % 2 == 0 { mid + k / 2 } else { mid - (k + 1) / 2 });
    for idx in order.filter(|&i| (0..len).contains(&i)) {
        let mu = ranked[idx as usize].1;
        if let Ok(e) = CalibratedEstimator::calibrate(op, interp, mu, res_inner) {
            return Ok((mu, e));
        }
    }
    Err(Error::AtPole)
}

/// One-shot form of [`LinearEstimator`].
pub fn residual_estimator_linear(
    op: &AffineOperator,
    interp: &RationalInterpolant,
    mu: C64,
    res_inner: &InnerProduct,
) -> Result<Residual> {
    Ok(LinearEstimator::new(op, interp, res_inner)?.estimate(mu))
}

/// One-shot form of [`CalibratedEstimator`].
pub fn residual_estimator_calibrated(interp: &RationalInterpolant, mu: C64, constant: f64) -> Residual {
    CalibratedEstimator::with_constant(interp, constant).estimate(mu)
}
