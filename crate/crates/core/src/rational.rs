//! Minimal rational interpolants.
//!
//! For snapshots `u(μ_1), …, u(μ_S)` and a denominator degree `N ≤ S − 1`, the
//! surrogate is `ũ = I(uQ)/Q`, where `I` is polynomial interpolation at the nodes
//! and `Q` minimizes
//!
//! ```text
//! j(Q) = ‖ Σ_j u(μ_j) Q(μ_j) / ω'(μ_j) ‖_V
//! ```
//!
//! (the leading coefficient of `I(uQ)`) over polynomials with unit coefficient
//! norm. Writing the snapshots in a `V`-orthonormal basis turns `j(Q)²` into
//! `q^H Ψ^H Ψ q`, so the optimal `q` is the smallest right singular vector of the
//! `rank × (N+1)` Gramian factor `Ψ`.
//!
//! Evaluation uses the second barycentric form with weights `Q(μ_j)/ω'(μ_j)`.

use crate::linalg::{self, c, norm2};
use crate::polybasis::{PolyBasis, PolyCoeffs, Roots};
use crate::prelude::*;
use crate::sampling::SampleSet;
use crate::snapshots::{InnerProduct, SnapshotBasis};

/// Relative distance below which an evaluation point is treated as a node.
pub const NODE_TOL: f64 = 1e-14;
/// Relative size of the barycentric denominator below which a point is flagged near a pole.
pub const POLE_TOL: f64 = 1e-13;

/// How the denominator degree follows the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreePolicy {
    /// Fixed `N`.
    Fixed(usize),
    /// `N = S − 1`.
    Diagonal,
}

impl DegreePolicy {
    pub fn degree_for(&self, samples: usize) -> Result<usize> {
        if samples == 0 {
            return Err(Error::EmptySampleSet);
        }
        match *self {
            DegreePolicy::Diagonal => Ok(samples - 1),
            DegreePolicy::Fixed(n) if n < samples => Ok(n),
            DegreePolicy::Fixed(n) => Err(Error::DegreeExceedsSamples { degree: n, samples }),
        }
    }
}

/// Denominator degree and the basis that defines its norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MriConfig {
    degree: usize,
    basis: PolyBasis,
}

impl MriConfig {
    /// The basis cap is raised to `degree` if needed.
    pub fn new(degree: usize, basis: PolyBasis) -> Self {
        let basis = if basis.max_degree() < degree { basis.with_max_degree(degree) } else { basis };
        MriConfig { degree, basis }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &PolyBasis {
        &self.basis
    }
}

/// Assembles `Ψ[i][l] = Σ_j w_i(μ_j) ψ_l(μ_j) / ω'(μ_j)`.
pub fn build_gramian_factor(snap: &SnapshotBasis, samples: &SampleSet, config: &MriConfig) -> Result<CMat> {
    let s = samples.len();
    if snap.snapshot_count() != s {
        return Err(Error::DimensionMismatch { expected: s, found: snap.snapshot_count() });
    }
    if config.degree >= s {
        return Err(Error::DegreeExceedsSamples { degree: config.degree, samples: s });
    }
    let cols = config.degree + 1;
    // B[j][l] = ψ_l(μ_j) / ω'(μ_j), then Ψ = W B
    let mut scaled = CMat::zeros(s, cols);
    let mut row = vec![c(0.0, 0.0); cols];
    for (j, (&mu, &wp)) in samples.nodes().iter().zip(samples.omega_prime()).enumerate() {
        config.basis.fill_values(mu, &mut row);
        for (l, v) in row.iter().enumerate() {
            scaled[(j, l)] = v / wp;
        }
    }
    Ok(snap.coords() * scaled)
}

/// Optimal denominator coefficients from the Gramian factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalDenominator {
    /// Unit vector, phase-fixed so that its largest entry is real and positive.
    pub coeffs: Vec<C64>,
    pub sigma_min: f64,
    /// `σ_min / σ_next`: close to 1 when the minimizer is not unique, 0 for `N = 0`.
    pub sigma_gap: f64,
}

/// Smallest right singular vector of `Ψ`.
///
/// An identically zero `Ψ` makes every unit vector optimal; the tie is broken by
/// returning the first canonical vector (a constant denominator).
pub fn minimal_denominator(psi: &CMat) -> Result<MinimalDenominator> {
    let cols = psi.ncols();
    if cols == 0 {
        return Err(Error::InvalidArgument("Gramian factor has no columns"));
    }
    if psi.iter().all(|z| *z == c(0.0, 0.0)) {
        let mut coeffs = vec![c(0.0, 0.0); cols];
        coeffs[0] = c(1.0, 0.0);
        let sigma_gap = if cols > 1 { 1.0 } else { 0.0 };
        return Ok(MinimalDenominator { coeffs, sigma_min: 0.0, sigma_gap });
    }
    let ms = linalg::min_right_singular(psi);
    let sigma_gap = match ms.sigma_next {
        None => 0.0,
        Some(next) if next > 0.0 => (ms.sigma_min / next).min(1.0),
        Some(_) => 1.0,
    };
    let mut coeffs: Vec<C64> = ms.vector.iter().copied().collect();
    let nrm = norm2(&coeffs);
    coeffs.iter_mut().for_each(|z| *z /= nrm);
    fix_phase(&mut coeffs);
    Ok(MinimalDenominator { coeffs, sigma_min: ms.sigma_min, sigma_gap })
}

/// Rotates `v` so that its first (near-)largest entry is real positive.
fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() >= (1.0 - 1e-8) * max).copied() {
        let rot = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

/// Distance from each true pole to the closest approximate pole.
pub fn pole_matching_error(true_poles: &[C64], approx_poles: &[C64]) -> Result<Vec<f64>> {
    if approx_poles.is_empty() {
        return Err(Error::EmptyApprox);
    }
    Ok(true_poles
        .iter()
        .map(|t| approx_poles.iter().map(|a| (a - t).norm()).fold(f64::INFINITY, f64::min))
        .collect())
}

/// What happened at an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalStatus {
    Regular,
    /// The point is (numerically) sample node `j`; the snapshot was returned.
    Node(usize),
    /// The barycentric denominator nearly vanishes; the value is unreliable.
    NearPole,
}

/// Value of the surrogate at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: CVec,
    pub status: EvalStatus,
}

/// Surrogate in the `V`-orthonormal snapshot coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordEvaluation {
    pub coords: CVec,
    pub status: EvalStatus,
}

/// A minimal rational interpolant of type `[S−1/N]`.
#[derive(Debug, Clone)]
pub struct RationalInterpolant {
    samples: SampleSet,
    snapshots: CMat,
    snap: SnapshotBasis,
    psi: CMat,
    denominator: PolyCoeffs,
    qnode: Vec<C64>,
    weights: Vec<C64>,
    sigma_min: f64,
    sigma_gap: f64,
}

impl RationalInterpolant {
    /// Orthonormalizes the snapshots, assembles `Ψ` and takes its minimal right singular vector.
    pub fn build(snapshots: &CMat, inner: &InnerProduct, samples: &SampleSet, config: &MriConfig) -> Result<Self> {
        let s = samples.len();
        if snapshots.ncols() != s {
            return Err(Error::DimensionMismatch { expected: s, found: snapshots.ncols() });
        }
        if config.degree >= s {
            return Err(Error::DegreeExceedsSamples { degree: config.degree, samples: s });
        }
        let snap = SnapshotBasis::orthonormalize(inner, snapshots)?;
        let psi = build_gramian_factor(&snap, samples, config)?;
        let opt = minimal_denominator(&psi)?;
        let denominator = PolyCoeffs::new(*config.basis(), opt.coeffs)?;
        Ok(Self::assemble(samples.clone(), snapshots.clone(), snap, psi, denominator, opt.sigma_min, opt.sigma_gap))
    }

    /// Rebuilds an interpolant around a given denominator (e.g. one read back from disk).
    ///
    /// `sigma_min` is set to `j(Q)` for that denominator; `sigma_gap` is recomputed from `Ψ`.
    pub fn with_denominator(
        snapshots: &CMat,
        inner: &InnerProduct,
        samples: &SampleSet,
        denominator: PolyCoeffs,
    ) -> Result<Self> {
        let s = samples.len();
        if snapshots.ncols() != s {
            return Err(Error::DimensionMismatch { expected: s, found: snapshots.ncols() });
        }
        let config = MriConfig::new(denominator.degree(), *denominator.basis());
        if config.degree >= s {
            return Err(Error::DegreeExceedsSamples { degree: config.degree, samples: s });
        }
        let snap = SnapshotBasis::orthonormalize(inner, snapshots)?;
        let psi = build_gramian_factor(&snap, samples, &config)?;
        let sigma_gap = minimal_denominator(&psi)?.sigma_gap;
        let q = CVec::from_column_slice(denominator.coeffs());
        let sigma_min = norm2((&psi * q).as_slice());
        Ok(Self::assemble(samples.clone(), snapshots.clone(), snap, psi, denominator, sigma_min, sigma_gap))
    }

    fn assemble(
        samples: SampleSet,
        snapshots: CMat,
        snap: SnapshotBasis,
        psi: CMat,
        denominator: PolyCoeffs,
        sigma_min: f64,
        sigma_gap: f64,
    ) -> Self {
        let qnode: Vec<C64> = samples.nodes().iter().map(|&mu| denominator.eval(mu)).collect();
        let weights = qnode.iter().zip(samples.omega_prime()).map(|(q, w)| q / w).collect();
        RationalInterpolant { samples, snapshots, snap, psi, denominator, qnode, weights, sigma_min, sigma_gap }
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    /// Original snapshots, one per column.
    pub fn snapshots(&self) -> &CMat {
        &self.snapshots
    }

    pub fn snapshot_basis(&self) -> &SnapshotBasis {
        &self.snap
    }

    pub fn gramian_factor(&self) -> &CMat {
        &self.psi
    }

    pub fn denominator(&self) -> &PolyCoeffs {
        &self.denominator
    }

    pub fn degree(&self) -> usize {
        self.denominator.degree()
    }

    /// `Q(μ_j)` at every node.
    pub fn qnode(&self) -> &[C64] {
        &self.qnode
    }

    /// Barycentric weights `Q(μ_j)/ω'(μ_j)`.
    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn sigma_gap(&self) -> f64 {
        self.sigma_gap
    }

    /// `Q(μ)`.
    pub fn denominator_eval(&self, mu: C64) -> C64 {
        self.denominator.eval(mu)
    }

    /// `j(Q) = ‖Ψ q‖₂` for any coefficient vector of degree at most `N` in the same basis.
    pub fn j_functional(&self, q: &[C64]) -> Result<f64> {
        let cols = self.psi.ncols();
        if q.len() > cols || q.is_empty() {
            return Err(Error::DimensionMismatch { expected: cols, found: q.len() });
        }
        let mut full = CVec::zeros(cols);
        full.rows_mut(0, q.len()).copy_from_slice(q);
        Ok(norm2((&self.psi * full).as_slice()))
    }

    /// `Σ_j u(μ_j) Q(μ_j) / ω'(μ_j)`, the leading coefficient of `I(uQ)`.
    pub fn leading_coefficient(&self) -> CVec {
        let w = CVec::from_column_slice(&self.weights);
        &self.snapshots * w
    }

    /// Surrogate value in snapshot coordinates.
    pub fn evaluate_coords(&self, mu: C64) -> CoordEvaluation {
        let coords = self.snap.coords();
        if let Some(j) = self.samples.nearest_node_within(mu, NODE_TOL * self.samples.scale()) {
            return CoordEvaluation { coords: coords.column(j).into_owned(), status: EvalStatus::Node(j) };
        }
        let mut num = CVec::zeros(coords.nrows());
        let mut den = c(0.0, 0.0);
        let mut mag = 0.0;
        for (j, (&node, &w)) in self.samples.nodes().iter().zip(&self.weights).enumerate() {
            let t = w / (mu - node);
            den += t;
            mag += t.norm();
            num.axpy(t, &coords.column(j), c(1.0, 0.0));
        }
        let status = if den.norm() < POLE_TOL * mag || mag == 0.0 { EvalStatus::NearPole } else { EvalStatus::Regular };
        CoordEvaluation { coords: num / den, status }
    }

    /// Surrogate value in `C^n`.
    pub fn evaluate(&self, mu: C64) -> Evaluation {
        let ce = self.evaluate_coords(mu);
        if let EvalStatus::Node(j) = ce.status {
            return Evaluation { value: self.snapshots.column(j).into_owned(), status: ce.status };
        }
        let value = if self.snap.rank() == 0 { CVec::zeros(self.snap.dim()) } else { self.snap.phi() * ce.coords };
        Evaluation { value, status: ce.status }
    }

    /// Roots of the denominator.
    pub fn poles(&self) -> Result<Roots> {
        self.denominator.roots()
    }
}
