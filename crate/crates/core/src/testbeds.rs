//! Synthetic full-order models with known poles, and the POD baseline.
//!
//! Random draws use `ChaCha8Rng::seed_from_u64(seed)`. For [`random_normal_fom`]
//! the draw order is: `n` eigenvalues (real part, then imaginary part, each
//! uniform in the box), the `n × n` Gaussian matrix column by column (real part,
//! then imaginary part of each entry), then the right-hand side `v` the same way.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::estimators::AffineOperator;
use crate::linalg::{self, c, norm2};
use crate::prelude::*;
use crate::snapshots::InnerProduct;

const POLE_HIT_TOL: f64 = 1e-12;

/// `u(μ) = Σ_λ v_λ / (λ − μ)`.
#[derive(Debug, Clone)]
pub struct MeromorphicMap {
    poles: Vec<C64>,
    residues: Vec<CVec>,
    orthogonal: bool,
}

impl MeromorphicMap {
    pub fn new(poles: Vec<C64>, residues: Vec<CVec>) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::DimensionMismatch { expected: poles.len(), found: residues.len() });
        }
        if poles.is_empty() {
            return Err(Error::InvalidArgument("map needs at least one pole"));
        }
        let n = residues[0].len();
        for r in &residues {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
        }
        for (i, a) in poles.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidArgument("poles must be finite"));
            }
            for (j, b) in poles.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(Error::DuplicateNode(i, j));
                }
            }
        }
        Ok(MeromorphicMap { poles, residues, orthogonal: false })
    }

    /// Same as [`MeromorphicMap::new`], additionally checking that the residues are
    /// pairwise orthogonal in `inner`.
    pub fn new_orthogonal(poles: Vec<C64>, residues: Vec<CVec>, inner: &InnerProduct) -> Result<Self> {
        let mut map = Self::new(poles, residues)?;
        let norms: Vec<f64> = map.residues.iter().map(|r| inner.norm(r)).collect::<Result<_>>()?;
        for i in 0..map.residues.len() {
            for j in i + 1..map.residues.len() {
                let ip = inner.inner(&map.residues[i], &map.residues[j])?;
                if ip.norm() >= 1e-12 * norms[i] * norms[j] && ip.norm() > 0.0 {
                    return Err(Error::InvalidArgument("residues are not orthogonal"));
                }
            }
        }
        map.orthogonal = true;
        Ok(map)
    }

    /// Residues are the first `poles.len()` columns of a unitary matrix
    /// obtained from a complex Gaussian draw, scaled by `1 + k/len`.
    pub fn random_orthogonal(poles: Vec<C64>, dim: usize, seed: u64) -> Result<Self> {
        let k = poles.len();
        if k > dim {
            return Err(Error::InvalidArgument("more orthogonal residues than dimensions"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gaussian_matrix(&mut rng, dim, k);
        let q = g.qr().q();
        let residues = (0..k).map(|j| q.column(j) * c(1.0 + j as f64 / k as f64, 0.0)).collect();
        Self::new_orthogonal(poles, residues, &InnerProduct::euclidean(dim))
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn residues(&self) -> &[CVec] {
        &self.residues
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn dim(&self) -> usize {
        self.residues[0].len()
    }

    pub fn eval(&self, mu: C64) -> Result<CVec> {
        let mut out = CVec::zeros(self.dim());
        for (&lambda, v) in self.poles.iter().zip(&self.residues) {
            let d = lambda - mu;
            if d.norm() <= POLE_HIT_TOL * (1.0 + lambda.norm()) {
                return Err(Error::AtPole);
            }
            out.axpy(c(1.0, 0.0) / d, v, c(1.0, 0.0));
        }
        Ok(out)
    }

    /// Snapshot matrix with one column per node.
    pub fn snapshots(&self, nodes: &[C64]) -> Result<CMat> {
        let cols: Vec<CVec> = nodes.iter().map(|&mu| self.eval(mu)).collect::<Result<_>>()?;
        Ok(CMat::from_columns(&cols))
    }

    /// Poles ordered by distance from `center`.
    pub fn sorted_poles(&self, center: C64) -> Vec<C64> {
        sort_by_distance(&self.poles, center)
    }
}

/// Sorts by `|λ − center|`, ties broken by real part, then imaginary part.
pub fn sort_by_distance(points: &[C64], center: C64) -> Vec<C64> {
    let mut out = points.to_vec();
    out.sort_by(|a, b| {
        (a - center)
            .norm()
            .total_cmp(&(b - center).norm())
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
    });
    out
}

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// `(A − μI) u = v` with `A = U diag(λ) U^H` normal.
#[derive(Debug, Clone)]
pub struct NormalEigenFom {
    a: CMat,
    v: CVec,
    eigenvalues: Vec<C64>,
    eigenvectors: CMat,
    seed: u64,
}

/// Random normal problem; eigenvalues uniform in `[lo, hi]²`, default box `(-5, 5)`.
pub fn random_normal_fom(n: usize, bound_box: (f64, f64), seed: u64) -> Result<NormalEigenFom> {
    let (lo, hi) = bound_box;
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1"));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument("bounding box must satisfy lo < hi"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eigenvalues: Vec<C64> = (0..n)
        .map(|_| {
            let re = rng.random_range(lo..hi);
            let im = rng.random_range(lo..hi);
            c(re, im)
        })
        .collect();
    NormalEigenFom::from_rng(eigenvalues, &mut rng, seed)
}

impl NormalEigenFom {
    /// Prescribed spectrum with random eigenvectors and right-hand side.
    pub fn with_eigenvalues(eigenvalues: Vec<C64>, seed: u64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("dimension must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_rng(eigenvalues, &mut rng, seed)
    }

    /// Explicit unitary eigenvectors and right-hand side.
    pub fn from_parts(eigenvalues: Vec<C64>, eigenvectors: CMat, v: CVec) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: eigenvectors.ncols() });
        }
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let d = CMat::from_diagonal(&CVec::from_column_slice(&eigenvalues));
        let a = &eigenvectors * d * eigenvectors.adjoint();
        Ok(NormalEigenFom { a, v, eigenvalues, eigenvectors, seed: 0 })
    }

    fn from_rng(eigenvalues: Vec<C64>, rng: &mut ChaCha8Rng, seed: u64) -> Result<Self> {
        let n = eigenvalues.len();
        let g = gaussian_matrix(rng, n, n);
        let u = g.qr().q();
        let v = CVec::from_iterator(n, (0..n).map(|_| gaussian(rng)));
        let mut out = Self::from_parts(eigenvalues, u, v)?;
        out.seed = seed;
        Ok(out)
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    pub fn rhs(&self) -> &CVec {
        &self.v
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// `‖AA^H − A^H A‖_F / ‖A‖_F²`.
    pub fn normality_defect(&self) -> f64 {
        let ah = self.a.adjoint();
        let comm = &self.a * &ah - &ah * &self.a;
        let na = self.a.norm();
        if na == 0.0 {
            0.0
        } else {
            comm.norm() / (na * na)
        }
    }

    /// Dense LU solve of `(A − μI) u = v`.
    pub fn solve(&self, mu: C64) -> Result<CVec> {
        if self.eigenvalues.iter().any(|&l| (l - mu).norm() <= POLE_HIT_TOL) {
            return Err(Error::SingularSystem);
        }
        let n = self.dim();
        let shifted = &self.a - CMat::identity(n, n) * mu;
        linalg::lu_solve(shifted, &self.v)
    }

    /// Spectral form with residues `(u_k^H v) u_k`.
    pub fn as_meromorphic(&self) -> MeromorphicMap {
        let residues = (0..self.dim())
            .map(|k| {
                let uk = self.eigenvectors.column(k);
                uk * uk.dotc(&self.v)
            })
            .collect();
        MeromorphicMap { poles: self.eigenvalues.clone(), residues, orthogonal: true }
    }

    /// `F(μ) = A − μI`, `f = v`.
    pub fn as_affine_operator(&self) -> AffineOperator {
        let n = self.dim();
        AffineOperator::linear(self.a.clone(), -CMat::identity(n, n), self.v.clone())
            .expect("dimensions agree by construction")
    }

    pub fn sorted_poles(&self, center: C64) -> Vec<C64> {
        sort_by_distance(&self.eigenvalues, center)
    }
}

/// Damped elastic bar on `[0, 1]`, clamped at 0 and loaded at the free end 1.
///
/// `F(ν) = K0 + ν·2πηι·M0 − ν²·4π²·M0` with `M0 = ρI` and `K0` the
/// second-difference stiffness `(1/h²)·tridiag` on the `m − 1` unknown grid values.
#[derive(Debug, Clone)]
pub struct DampedBar {
    k0: DMatrix<f64>,
    eta: f64,
    rho: f64,
    op: AffineOperator,
}

/// `stiffness` holds one value per element (`m − 1` entries).
pub fn helmholtz_1d_fom(grid_points: usize, eta: f64, rho: f64, stiffness: &[f64]) -> Result<DampedBar> {
    let m = grid_points;
    if m < 3 {
        return Err(Error::InvalidArgument("need at least 3 grid points"));
    }
    if stiffness.len() != m - 1 {
        return Err(Error::DimensionMismatch { expected: m - 1, found: stiffness.len() });
    }
    if stiffness.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::InvalidArgument("stiffness must be positive"));
    }
    if !(rho > 0.0 && rho.is_finite()) || !eta.is_finite() {
        return Err(Error::InvalidArgument("density must be positive and damping finite"));
    }
    let dofs = m - 1;
    let h = 1.0 / (m - 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    // unknown i sits at x_{i+1}; element e joins x_e and x_{e+1}
    let mut k0 = DMatrix::<f64>::zeros(dofs, dofs);
    for (e, &k) in stiffness.iter().enumerate() {
        let w = k * inv_h2;
        if e == 0 {
            k0[(0, 0)] += w;
        } else {
            let (a, b) = (e - 1, e);
            k0[(a, a)] += w;
            k0[(b, b)] += w;
            k0[(a, b)] -= w;
            k0[(b, a)] -= w;
        }
    }
    let kc = k0.map(|x| c(x, 0.0));
    let m0 = CMat::identity(dofs, dofs) * c(rho, 0.0);
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut f = CVec::zeros(dofs);
    f[dofs - 1] = c(1.0, 0.0);
    let op = AffineOperator::polynomial(
        vec![kc, &m0 * c(0.0, two_pi * eta), &m0 * c(-two_pi * two_pi, 0.0)],
        f,
    )?;
    Ok(DampedBar { k0, eta, rho, op })
}

impl DampedBar {
    pub fn operator(&self) -> &AffineOperator {
        &self.op
    }

    pub fn stiffness_matrix(&self) -> &DMatrix<f64> {
        &self.k0
    }

    pub fn dim(&self) -> usize {
        self.k0.nrows()
    }

    pub fn solve(&self, nu: C64) -> Result<CVec> {
        self.op.solve(nu)
    }

    /// Inner product weighted by `K0`.
    pub fn energy_inner(&self) -> InnerProduct {
        InnerProduct::weighted(self.k0.map(|x| c(x, 0.0))).expect("clamped stiffness is positive definite")
    }

    /// Roots of `det F(ν) = 0`: for each eigenvalue `κ` of `K0`,
    /// the two roots of `4π²ρν² − 2πηιρν − κ = 0`.
    pub fn resonances(&self) -> Vec<C64> {
        let kappas = self.k0.clone().symmetric_eigen().eigenvalues;
        let two_pi = 2.0 * core::f64::consts::PI;
        let a = c(two_pi * two_pi * self.rho, 0.0);
        let b = c(0.0, -two_pi * self.eta * self.rho);
        let mut out = Vec::with_capacity(2 * kappas.len());
        for &kappa in kappas.iter() {
            let disc = (b * b + a * c(4.0 * kappa, 0.0)).sqrt();
            out.push((-b + disc) / (a * c(2.0, 0.0)));
            out.push((-b - disc) / (a * c(2.0, 0.0)));
        }
        out
    }

    pub fn sorted_resonances(&self, center: C64) -> Vec<C64> {
        sort_by_distance(&self.resonances(), center)
    }
}

/// Uniform stiffness profile for [`helmholtz_1d_fom`].
pub fn uniform_stiffness(grid_points: usize, value: f64) -> Vec<f64> {
    vec![value; grid_points.saturating_sub(1)]
}

/// Ritz values of `A` on the `N` dominant left singular directions of the snapshots.
///
/// In a weighted product the directions are `M`-orthonormal and the projected
/// matrix is `Φ^H M A Φ`.
pub fn pod_pole_baseline(snapshots: &CMat, inner: &InnerProduct, a: &CMat, n: usize) -> Result<Vec<C64>> {
    let dim = snapshots.nrows();
    inner_dim_check(inner, dim)?;
    if a.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: a.ncols() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("POD dimension must be positive"));
    }
    let (x, lh) = match inner {
        InnerProduct::Euclidean { .. } => (snapshots.clone(), None),
        InnerProduct::Weighted { chol, .. } => {
            let lh = chol.l().adjoint();
            (&lh * snapshots, Some(lh))
        }
    };
    let svd = x.svd(true, false);
    let u = svd.u.ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let top = svd.singular_values[order[0]];
    let rank = order.iter().filter(|&&i| svd.singular_values[i] > 1e-12 * top && top > 0.0).count();
    if n > rank {
        return Err(Error::RankDeficient { requested: n, rank });
    }
    let cols: Vec<CVec> = order[..n].iter().map(|&i| u.column(i).into_owned()).collect();
    let u_n = CMat::from_columns(&cols);
    let projected = match lh {
        None => u_n.adjoint() * a * &u_n,
        Some(lh) => {
            let phi = lh.solve_upper_triangular(&u_n).ok_or(Error::SingularSystem)?;
            let m = inner.weight().expect("weighted product");
            phi.adjoint() * m * a * phi
        }
    };
    linalg::eigenvalues(&projected)
}

fn inner_dim_check(inner: &InnerProduct, dim: usize) -> Result<()> {
    if inner.dim() != dim {
        return Err(Error::DimensionMismatch { expected: inner.dim(), found: dim });
    }
    Ok(())
}

/// Relative residual `‖(A − μI)u − v‖ / ‖v‖`.
pub fn relative_solve_residual(fom: &NormalEigenFom, mu: C64, u: &CVec) -> f64 {
    let n = fom.dim();
    let r = (fom.matrix() - CMat::identity(n, n) * mu) * u - fom.rhs();
    norm2(r.as_slice()) / norm2(fom.rhs().as_slice())
}
