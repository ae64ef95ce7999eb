//! Hierarchical orthonormal polynomial bases for the denominator space.
//!
//! The denominator norm is the Euclidean norm of the coefficient vector in one of
//! two bases, both orthonormal with respect to an averaged `L²(Γ)` product:
//!
//! - shifted monomials `ψ_l(μ) = (μ − μ0)^l`, orthonormal on the circle `|μ − μ0| = 1`;
//! - scaled Chebyshev polynomials on a segment `[a, b]`: `ψ_0 = 1`, `ψ_l = √2 T_l(z(μ))`
//!   with `z(μ) = (2μ − a − b)/(b − a)`, orthonormal for the Chebyshev weight.
//!
//! Roots come from the companion matrix (monomials) or the colleague matrix
//! (Chebyshev), never from a change of basis.

use core::f64::consts::SQRT_2;

use crate::linalg::{self, c, norm2};
use crate::prelude::*;

/// Relative threshold for truncating the effective degree of a coefficient vector.
pub const DEGREE_TOL: f64 = 1e-12;

/// Which polynomial family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    ShiftedMonomial { center: C64 },
    Chebyshev { a: C64, b: C64 },
}

/// A basis `{ψ_0, …, ψ_max_degree}` with `deg ψ_l = l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyBasis {
    kind: BasisKind,
    max_degree: usize,
}

impl PolyBasis {
    pub fn monomial(center: C64, max_degree: usize) -> Self {
        PolyBasis { kind: BasisKind::ShiftedMonomial { center }, max_degree }
    }

    pub fn chebyshev(a: C64, b: C64, max_degree: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument("Chebyshev basis needs distinct endpoints"));
        }
        Ok(PolyBasis { kind: BasisKind::Chebyshev { a, b }, max_degree })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Same family with a different degree cap.
    pub fn with_max_degree(&self, max_degree: usize) -> Self {
        PolyBasis { kind: self.kind, max_degree }
    }

    /// The local variable: `μ − μ0` for monomials, `z(μ)` for Chebyshev.
    fn local(&self, mu: C64) -> C64 {
        match self.kind {
            BasisKind::ShiftedMonomial { center } => mu - center,
            BasisKind::Chebyshev { a, b } => (mu * 2.0 - a - b) / (b - a),
        }
    }

    /// Maps a root in the local variable back to the parameter plane.
    fn to_global(&self, t: C64) -> C64 {
        match self.kind {
            BasisKind::ShiftedMonomial { center } => t + center,
            BasisKind::Chebyshev { a, b } => (a + b) * 0.5 + (b - a) * 0.5 * t,
        }
    }

    /// `ψ_l(μ)`.
    pub fn eval_basis(&self, l: usize, mu: C64) -> Result<C64> {
        if l > self.max_degree {
            return Err(Error::DegreeTooHigh { degree: l, max: self.max_degree });
        }
        let mut out = vec![C64::new(0.0, 0.0); l + 1];
        self.fill_values(mu, &mut out);
        Ok(out[l])
    }

    /// Writes `ψ_0(μ), …, ψ_{k-1}(μ)` into `out` (`k = out.len()`), ignoring the degree cap.
    pub(crate) fn fill_values(&self, mu: C64, out: &mut [C64]) {
        if out.is_empty() {
            return;
        }
        let t = self.local(mu);
        match self.kind {
            BasisKind::ShiftedMonomial { .. } => {
                let mut p = c(1.0, 0.0);
                for v in out.iter_mut() {
                    *v = p;
                    p *= t;
                }
            }
            BasisKind::Chebyshev { .. } => {
                // three-term recurrence on T_l, scaled afterwards
                let mut prev = c(1.0, 0.0);
                let mut cur = t;
                out[0] = prev;
                for (l, v) in out.iter_mut().enumerate().skip(1) {
                    if l > 1 {
                        let next = t * cur * 2.0 - prev;
                        prev = cur;
                        cur = next;
                    }
                    *v = cur * SQRT_2;
                }
            }
        }
    }

    /// Values of all basis functions up to the cap.
    pub fn values(&self, mu: C64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.max_degree + 1];
        self.fill_values(mu, &mut out);
        out
    }
}

/// Roots of a polynomial: the finite ones, plus how many sit at infinity
/// because of deficient degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Roots {
    pub finite: Vec<C64>,
    pub infinite: usize,
}

/// A polynomial `Q = Σ q_l ψ_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    basis: PolyBasis,
    coeffs: Vec<C64>,
}

impl PolyCoeffs {
    pub fn new(basis: PolyBasis, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("coefficient vector must be nonempty"));
        }
        if coeffs.len() > basis.max_degree + 1 {
            return Err(Error::DegreeTooHigh { degree: coeffs.len() - 1, max: basis.max_degree });
        }
        Ok(PolyCoeffs { basis, coeffs })
    }

    pub fn basis(&self) -> &PolyBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Nominal degree `N` (coefficient count minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Σ_l q_l ψ_l(μ)`.
    pub fn eval(&self, mu: C64) -> C64 {
        match self.basis.kind {
            BasisKind::ShiftedMonomial { center } => {
                let t = mu - center;
                self.coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &q| acc * t + q)
            }
            BasisKind::Chebyshev { .. } => {
                let t = self.basis.local(mu);
                clenshaw(&self.chebyshev_series(), t)
            }
        }
    }

    /// `‖Q‖_N`, the Euclidean norm of the coefficients.
    pub fn norm(&self) -> f64 {
        norm2(&self.coeffs)
    }

    /// Largest `l` with `|q_l| > DEGREE_TOL · ‖q‖`.
    pub fn effective_degree(&self) -> Result<usize> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(Error::AllZero);
        }
        Ok(self.coeffs.iter().rposition(|q| q.norm() > DEGREE_TOL * nrm).unwrap_or(0))
    }

    /// Coefficients in the plain `T_l` series.
    fn chebyshev_series(&self) -> Vec<C64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, &q)| if l == 0 { q } else { q * SQRT_2 })
            .collect()
    }

    /// Roots in the parameter plane, with deficient degree reported as roots at infinity.
    pub fn roots(&self) -> Result<Roots> {
        let degree = self.effective_degree()?;
        let infinite = self.degree() - degree;
        if degree == 0 {
            return Ok(Roots { finite: Vec::new(), infinite });
        }
        let local = match self.basis.kind {
            BasisKind::ShiftedMonomial { .. } => companion_roots(&self.coeffs[..=degree])?,
            BasisKind::Chebyshev { .. } => colleague_roots(&self.chebyshev_series()[..=degree])?,
        };
        let finite = local.into_iter().map(|t| self.basis.to_global(t)).collect();
        Ok(Roots { finite, infinite })
    }
}

/// Clenshaw summation of `Σ c_k T_k(t)`.
fn clenshaw(series: &[C64], t: C64) -> C64 {
    let mut b1 = c(0.0, 0.0);
    let mut b2 = c(0.0, 0.0);
    for &ck in series.iter().skip(1).rev() {
        let b0 = t * b1 * 2.0 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + series[0]
}

/// Roots of `Σ p_k t^k` (nonzero leading coefficient) from the companion matrix.
fn companion_roots(p: &[C64]) -> Result<Vec<C64>> {
    let d = p.len() - 1;
    let lead = p[d];
    if d == 1 {
        return Ok(vec![-p[0] / lead]);
    }
    let mut m = CMat::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -p[i] / lead;
    }
    linalg::eigenvalues(&m)
}

/// Roots of `Σ c_k T_k(t)` (nonzero leading coefficient) from the colleague matrix.
fn colleague_roots(series: &[C64]) -> Result<Vec<C64>> {
    let d = series.len() - 1;
    let lead = series[d];
    if d == 1 {
        return Ok(vec![-series[0] / lead]);
    }
    let mut m = CMat::zeros(d, d);
    m[(0, 1)] = c(1.0, 0.0);
    for i in 1..d {
        m[(i, i - 1)] = c(0.5, 0.0);
        if i + 1 < d {
            m[(i, i + 1)] = c(0.5, 0.0);
        }
    }
    for k in 0..d {
        m[(d - 1, k)] -= series[k] / (lead * 2.0);
    }
    linalg::eigenvalues(&m)
}
