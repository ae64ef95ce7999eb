//! Snapshot storage under a configurable Hilbert inner product.
//!
//! The inner product is `⟨u, v⟩_V = v^H M u`: linear in the first argument,
//! conjugate-linear in the second. `M` is the identity for [`InnerProduct::Euclidean`].

use nalgebra::Dyn;

use crate::linalg::{self, c, norm2};
use crate::prelude::*;

/// Relative threshold below which a projected snapshot adds no new direction.
pub const RANK_TOL: f64 = 1e-12;
/// Absolute norm below which a lone snapshot is treated as zero.
pub const ZERO_TOL: f64 = 1e-300;

/// Inner product on `C^n`.
#[derive(Debug, Clone)]
pub enum InnerProduct {
    Euclidean { dim: usize },
    Weighted { m: CMat, chol: nalgebra::Cholesky<C64, Dyn> },
}

impl InnerProduct {
    pub fn euclidean(dim: usize) -> Self {
        InnerProduct::Euclidean { dim }
    }

    /// Weighted product `v^H M u`; `M` must be Hermitian positive definite.
    pub fn weighted(m: CMat) -> Result<Self> {
        let chol = linalg::cholesky(&m)?;
        Ok(InnerProduct::Weighted { m, chol })
    }

    pub fn dim(&self) -> usize {
        match self {
            InnerProduct::Euclidean { dim } => *dim,
            InnerProduct::Weighted { m, .. } => m.nrows(),
        }
    }

    /// The weight matrix, `None` for the Euclidean product.
    pub fn weight(&self) -> Option<&CMat> {
        match self {
            InnerProduct::Euclidean { .. } => None,
            InnerProduct::Weighted { m, .. } => Some(m),
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }

    /// `M u` (or `u` itself for the Euclidean product).
    pub fn apply(&self, u: &CVec) -> Result<CVec> {
        self.check(u.len())?;
        Ok(match self {
            InnerProduct::Euclidean { .. } => u.clone(),
            InnerProduct::Weighted { m, .. } => m * u,
        })
    }

    /// `⟨u, v⟩_V = v^H M u`.
    pub fn inner(&self, u: &CVec, v: &CVec) -> Result<C64> {
        self.check(v.len())?;
        let mu = self.apply(u)?;
        Ok(v.dotc(&mu))
    }

    pub fn norm(&self, u: &CVec) -> Result<f64> {
        match self {
            InnerProduct::Euclidean { .. } => {
                self.check(u.len())?;
                Ok(norm2(u.as_slice()))
            }
            InnerProduct::Weighted { chol, .. } => {
                self.check(u.len())?;
                // ‖u‖² = ‖L^H u‖²
                let lh = chol.l().adjoint() * u;
                Ok(norm2(lh.as_slice()))
            }
        }
    }
}

/// A `V`-orthonormal basis of the snapshot span, with the coordinates of each snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotBasis {
    inner: InnerProduct,
    phi: CMat,
    coords: CMat,
}

impl SnapshotBasis {
    /// Modified Gram–Schmidt with one reorthogonalization pass in the `V` product.
    ///
    /// Snapshots whose projected norm falls below `RANK_TOL` times their own norm
    /// add no basis vector, but their coordinates are still recorded.
    pub fn orthonormalize(inner: &InnerProduct, snapshots: &CMat) -> Result<Self> {
        let (n, s) = snapshots.shape();
        inner.check(n)?;
        if s == 0 || n == 0 {
            return Err(Error::InvalidArgument("snapshot matrix must be nonempty"));
        }
        let mut basis: Vec<CVec> = Vec::new();
        let mut weighted: Vec<CVec> = Vec::new();
        let mut columns: Vec<Vec<C64>> = Vec::with_capacity(s);
        for j in 0..s {
            let orig: CVec = snapshots.column(j).into_owned();
            let orig_norm = inner.norm(&orig)?;
            let mut x = orig.clone();
            let mut r = vec![c(0.0, 0.0); basis.len()];
            for _pass in 0..2 {
                for (i, (phi, mphi)) in basis.iter().zip(&weighted).enumerate() {
                    let coef = mphi.dotc(&x);
                    x.axpy(-coef, phi, c(1.0, 0.0));
                    r[i] += coef;
                }
            }
            let rest = inner.norm(&x)?;
            if orig_norm > ZERO_TOL && rest >= RANK_TOL * orig_norm {
                let phi = x / c(rest, 0.0);
                weighted.push(inner.apply(&phi)?);
                basis.push(phi);
                r.push(c(rest, 0.0));
            }
            columns.push(r);
        }
        if basis.is_empty() && s == 1 {
            return Err(Error::ZeroSnapshot);
        }
        let rank = basis.len();
        let phi = if rank == 0 { CMat::zeros(n, 0) } else { CMat::from_columns(&basis) };
        let mut coords = CMat::zeros(rank, s);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                coords[(i, j)] = v;
            }
        }
        Ok(SnapshotBasis { inner: inner.clone(), phi, coords })
    }

    pub fn inner(&self) -> &InnerProduct {
        &self.inner
    }

    /// Basis vectors as columns (`n × rank`).
    pub fn phi(&self) -> &CMat {
        &self.phi
    }

    /// Coordinates `w_i(μ_j)`: column `j` holds snapshot `j` (`rank × S`).
    pub fn coords(&self) -> &CMat {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.phi.ncols()
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn snapshot_count(&self) -> usize {
        self.coords.ncols()
    }

    /// Maps coordinates back to `C^n`.
    pub fn expand(&self, coords: &CVec) -> Result<CVec> {
        if coords.len() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: coords.len() });
        }
        if self.rank() == 0 {
            return Ok(CVec::zeros(self.dim()));
        }
        Ok(&self.phi * coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn e(n: usize, k: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[k] = c(1.0, 0.0);
        v
    }

    fn random_mat(n: usize, s: usize, seed: u64) -> CMat {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, s, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn spd(n: usize, seed: u64) -> CMat {
        let a = random_mat(n, n, seed);
        a.adjoint() * &a + CMat::identity(n, n) * c(0.5, 0.0)
    }

    #[test]
    fn inner_examples() {
        let ip = InnerProduct::euclidean(3);
        assert_eq!(ip.inner(&e(3, 0), &e(3, 0)).unwrap(), c(1.0, 0.0));
        assert_eq!(ip.inner(&e(3, 0), &e(3, 1)).unwrap(), c(0.0, 0.0));
        let w = InnerProduct::weighted(CMat::identity(3, 3) * c(2.0, 0.0)).unwrap();
        assert_eq!(w.inner(&e(3, 0), &e(3, 0)).unwrap(), c(2.0, 0.0));
        assert!(matches!(ip.inner(&e(2, 0), &e(3, 0)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn conjugation_convention() {
        let ip = InnerProduct::euclidean(1);
        let u = CVec::from_element(1, c(0.0, 1.0));
        let v = CVec::from_element(1, c(1.0, 0.0));
        // ⟨i u, v⟩ = i ⟨u, v⟩ and ⟨u, i v⟩ = −i ⟨u, v⟩
        assert_eq!(ip.inner(&u, &v).unwrap(), c(0.0, 1.0));
        assert_eq!(ip.inner(&v, &u).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn weighted_rejects_indefinite() {
        let mut m = CMat::identity(2, 2);
        m[(1, 1)] = c(-1.0, 0.0);
        assert!(matches!(InnerProduct::weighted(m), Err(Error::NotPositiveDefinite)));
        let mut h = CMat::identity(2, 2);
        h[(0, 1)] = c(0.0, 0.3);
        assert!(matches!(InnerProduct::weighted(h), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn single_snapshot() {
        let ip = InnerProduct::euclidean(2);
        let s = CMat::from_column_slice(2, 1, &[c(2.0, 0.0), c(0.0, 0.0)]);
        let b = SnapshotBasis::orthonormalize(&ip, &s).unwrap();
        assert_eq!(b.rank(), 1);
        assert_eq!(b.phi()[(0, 0)], c(1.0, 0.0));
        assert_eq!(b.coords()[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn repeated_snapshots_drop_rank() {
        let ip = InnerProduct::euclidean(3);
        let v = [c(1.0, 0.0), c(2.0, 1.0), c(0.0, -1.0)];
        let s = CMat::from_columns(&[CVec::from_column_slice(&v), CVec::from_column_slice(&v)]);
        let b = SnapshotBasis::orthonormalize(&ip, &s).unwrap();
        assert_eq!(b.rank(), 1);
        assert!((b.coords()[(0, 0)] - b.coords()[(0, 1)]).norm() < 1e-15);
    }

    #[test]
    fn identity_snapshots() {
        let ip = InnerProduct::euclidean(3);
        let b = SnapshotBasis::orthonormalize(&ip, &CMat::identity(3, 3)).unwrap();
        assert!((b.phi() - CMat::identity(3, 3)).norm() < 1e-15);
        assert!((b.coords() - CMat::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn zero_snapshot_errors() {
        let ip = InnerProduct::euclidean(2);
        assert!(matches!(SnapshotBasis::orthonormalize(&ip, &CMat::zeros(2, 1)), Err(Error::ZeroSnapshot)));
        let b = SnapshotBasis::orthonormalize(&ip, &CMat::zeros(2, 2)).unwrap();
        assert_eq!(b.rank(), 0);
        assert_eq!(b.coords().shape(), (0, 2));
    }

    #[test]
    fn reconstruction_and_gram_weighted() {
        let (n, s) = (200, 60);
        let m = spd(n, 7);
        let ip = InnerProduct::weighted(m.clone()).unwrap();
        let snaps = random_mat(n, s, 11);
        let b = SnapshotBasis::orthonormalize(&ip, &snaps).unwrap();
        assert_eq!(b.rank(), s);
        let gram = b.phi().adjoint() * &m * b.phi();
        let dev = (gram - CMat::identity(s, s)).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        assert!(dev < 1e-10, "gram deviation {dev}");
        let rec = b.phi() * b.coords();
        for j in 0..s {
            let diff: CVec = (rec.column(j) - snaps.column(j)).into_owned();
            let rel = ip.norm(&diff).unwrap() / ip.norm(&snaps.column(j).into_owned()).unwrap();
            assert!(rel < 1e-10);
        }
    }

    #[test]
    fn coordinate_gram_invariant_under_unitary() {
        let (n, s) = (12, 5);
        let snaps = random_mat(n, s, 3);
        let ip = InnerProduct::euclidean(n);
        let u = random_mat(n, n, 5).qr().q();
        let a = SnapshotBasis::orthonormalize(&ip, &snaps).unwrap();
        let b = SnapshotBasis::orthonormalize(&ip, &(u * &snaps)).unwrap();
        let ga = a.coords().adjoint() * a.coords();
        let gb = b.coords().adjoint() * b.coords();
        assert!((ga - gb).norm() < 1e-9);
    }
}
