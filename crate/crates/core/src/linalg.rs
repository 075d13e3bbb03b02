//! Dense decompositions backed by LAPACK.
//!
//! Complex Hermitian and general complex problems go through the real
//! embedding `[[A, -B], [B, A]]` of `A + iB`, whose spectrum repeats each
//! eigenvalue (or singular value) twice.

use nalgebra::{DMatrix, DVector};
use nalgebra_lapack::{SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::operator::CMatrix;

/// Thin SVD `M = U diag(s) V^T` with `s` decreasing.
pub fn svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    let svd = SVD::new(m.clone()).ok_or(Error::SvdFailed)?;
    let u = svd.u.columns(0, k).into_owned();
    let v = svd.vt.rows(0, k).transpose();
    Ok((u, svd.singular_values, v))
}

pub fn singular_values(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(svd(m)?.1)
}

/// Largest singular value, from the eigenvalues of the smaller Gram matrix.
pub fn largest_singular_value(m: &DMatrix<f64>) -> Result<f64> {
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let (vals, _) = symmetric_eigen(&gram)?;
    Ok(vals.max().max(0.0).sqrt())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric
/// matrix.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym).ok_or(Error::SvdFailed)?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

fn embed(c: &CMatrix) -> DMatrix<f64> {
    let (r, k) = c.shape();
    DMatrix::from_fn(2 * r, 2 * k, |i, j| {
        let z = c[(i % r, j % k)];
        match (i < r, j < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    let (vals, _) = symmetric_eigen(&embed(h))?;
    let mut vals: Vec<f64> = vals.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Singular values of a complex matrix, decreasing.
pub fn complex_singular_values(c: &CMatrix) -> Result<Vec<f64>> {
    let s = singular_values(&embed(c))?;
    let mut s: Vec<f64> = s.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}
