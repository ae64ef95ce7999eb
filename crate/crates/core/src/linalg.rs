//! Dense complex linear algebra used throughout the crate.
//!
//! Thin wrappers around `nalgebra` decompositions: balanced Schur eigenvalues,
//! the smallest right singular pair, LU solves and Hermitian checks.

use nalgebra::{Cholesky, Schur, LU};

use crate::prelude::*;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

const SCHUR_MAX_ITER: usize = 100_000;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Euclidean norm of a complex slice.
pub fn norm2(v: &[C64]) -> f64 {
    // scaled accumulation keeps tiny and huge entries representable
    let scale = v.iter().fold(0.0_f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ssq: f64 = v.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * ssq.sqrt()
}

/// Eigenvalues of a square complex matrix (balanced, then complex Schur).
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![m[(0, 0)]]),
        _ => {}
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence);
    }
    let balanced = balance(m.clone());
    let schur = Schur::try_new(balanced, f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NoConvergence)?;
    let t = schur.unpack().1;
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Diagonal similarity scaling by powers of two (Parlett–Reinsch) so that
/// row and column norms are comparable. Eigenvalues are unchanged exactly.
fn balance(mut a: CMat) -> CMat {
    let n = a.nrows();
    let radix = 2.0_f64;
    let radix2 = radix * radix;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += a[(j, i)].l1_norm();
                    row += a[(i, j)].l1_norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / radix;
            while col < g {
                f *= radix;
                col *= radix2;
            }
            g = row * radix;
            while col > g {
                f /= radix;
                col /= radix2;
            }
            if (col + row) / f < 0.95 * total {
                converged = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    a
}

/// Smallest right singular pair of a matrix, with the next singular value.
#[derive(Debug, Clone)]
pub struct MinSingular {
    pub vector: CVec,
    pub sigma_min: f64,
    /// Second smallest singular value, `None` for a single column.
    pub sigma_next: Option<f64>,
}

/// Computes the right singular vector for the smallest singular value of `a`
/// (including the zero singular values of wide matrices).
pub fn min_right_singular(a: &CMat) -> MinSingular {
    let cols = a.ncols();
    assert!(cols > 0, "matrix must have at least one column");
    // pad wide matrices with zero rows so that V is square
    let work = if a.nrows() < cols {
        let mut padded = CMat::zeros(cols, cols);
        padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    // stable sort: equal values keep the decomposition's order
    order.sort_by(|&x, &y| sv[x].partial_cmp(&sv[y]).unwrap_or(core::cmp::Ordering::Equal));
    let k = order[0];
    let vector = CVec::from_iterator(cols, v_t.row(k).iter().map(|z| z.conj()));
    MinSingular {
        vector,
        sigma_min: sv[k],
        sigma_next: order.get(1).map(|&i| sv[i]),
    }
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn lu_solve(a: CMat, b: &CVec) -> Result<CVec> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
    }
    let lu = LU::new(a);
    let x = lu.solve(b).ok_or(Error::SingularSystem)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(x)
}

/// Largest entrywise deviation from Hermitian symmetry, relative to the largest entry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let scale = m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(m: &CMat) -> Result<Cholesky<C64, nalgebra::Dyn>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if hermitian_defect(m) > 1e-12 {
        return Err(Error::NotPositiveDefinite);
    }
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    // complex square roots never fail, so check that the pivots were real positive
    let l = chol.l_dirty();
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0 && d.im.abs() <= 1e-12 * d.re) {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(chol)
}
