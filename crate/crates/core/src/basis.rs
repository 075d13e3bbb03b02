//! Hermitian operator bases and real coordinates in them.
//!
//! Every party carries the orthonormal basis `{1/sqrt(d), generalized
//! Gell-Mann matrices}`, normalized so that `Tr(E_a E_b) = delta_ab`. A
//! Hermitian operator on several parties then has a real coordinate tensor
//! `c[a_0, .., a_{N-1}] = Tr[(E_{a_0} x .. x E_{a_{N-1}}) X]`, and the matrix of
//! those coordinates across a bipartition is a realignment of `X` in a
//! rotated (Hermitian) basis.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bipartition::{party_permutation, Bipartition};
use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator};

/// Orthonormality tolerance for caller-supplied operator families.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Identity over `sqrt(d)` followed by the `d^2 - 1` generalized Gell-Mann
/// matrices (symmetric, antisymmetric, then diagonal), each with unit
/// Hilbert-Schmidt norm.
pub fn local_basis(d: usize) -> Arc<Vec<CMatrix>> {
    static CACHE: LazyLock<Mutex<HashMap<usize, Arc<Vec<CMatrix>>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));
    CACHE
        .lock()
        .expect("basis cache poisoned")
        .entry(d)
        .or_insert_with(|| Arc::new(build_local_basis(d)))
        .clone()
}

fn build_local_basis(d: usize) -> Vec<CMatrix> {
    let mut ops = Vec::with_capacity(d * d);
    ops.push(CMatrix::identity(d, d).unscale((d as f64).sqrt()));
    let h = 0.5f64.sqrt();
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = Complex64::new(h, 0.0);
            sym[(k, j)] = Complex64::new(h, 0.0);
            ops.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = Complex64::new(0.0, -h);
            anti[(k, j)] = Complex64::new(0.0, h);
            ops.push(anti);
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = Complex64::new(1.0 / norm, 0.0);
        }
        diag[(l, l)] = Complex64::new(-(l as f64) / norm, 0.0);
        ops.push(diag);
    }
    ops
}

/// Real coordinates of a Hermitian operator in the product of local bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinates {
    dims: Vec<usize>,
    values: DVector<f64>,
}

impl Coordinates {
    pub fn new(dims: Vec<usize>, values: DVector<f64>) -> Result<Self> {
        let expected: usize = dims.iter().map(|d| d * d).product();
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for local dimensions {dims:?}",
                values.len()
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn from_operator(x: &HermitianOperator) -> Self {
        let dims = x.dims().to_vec();
        let mut tensor = vectorize_per_party(x.data(), &dims);
        let mut shape: Vec<usize> = dims.iter().map(|d| d * d).collect();
        for (p, &d) in dims.iter().enumerate() {
            let basis = local_basis(d);
            // row a, column (i, j): E_a[j, i], so the product is Tr(E_a X).
            let forward = CMatrix::from_fn(d * d, d * d, |a, ij| basis[a][(ij % d, ij / d)]);
            tensor = mode_product(&tensor, &shape, p, &forward);
            shape[p] = d * d;
        }
        let values = DVector::from_iterator(tensor.len(), tensor.iter().map(|z| z.re));
        Self { dims, values }
    }

    pub fn to_operator(&self) -> HermitianOperator {
        let mut tensor: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let shape: Vec<usize> = self.dims.iter().map(|d| d * d).collect();
        for (p, &d) in self.dims.iter().enumerate() {
            let basis = local_basis(d);
            let backward = CMatrix::from_fn(d * d, d * d, |ij, a| basis[a][(ij / d, ij % d)]);
            tensor = mode_product(&tensor, &shape, p, &backward);
        }
        let data = devectorize_per_party(&tensor, &self.dims);
        let data = (&data + data.adjoint()).scale(0.5);
        HermitianOperator::from_hermitian_unchecked(self.dims.clone(), data)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// `Tr(X Y)` for the operators these coordinates describe.
    pub fn dot(&self, other: &Self) -> f64 {
        self.values.dot(&other.values)
    }

    /// `Tr(X)`; only the all-identity coordinate contributes.
    pub fn trace(&self) -> f64 {
        self.values[0] * self.dims.iter().map(|&d| (d as f64).sqrt()).product::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            values: self.values.scale(factor),
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    /// Coordinate matrix across `bp`: rows run over the alpha parties' basis
    /// labels, columns over the complement's.
    pub fn matricize(&self, bp: &Bipartition) -> Result<DMatrix<f64>> {
        self.check_bipartition(bp)?;
        let perm = coordinate_permutation(bp);
        let (rows, cols) = (bp.m_alpha().pow(2), bp.n_alpha_bar().pow(2));
        Ok(DMatrix::from_fn(rows, cols, |r, c| self.values[perm[r * cols + c]]))
    }

    /// Inverse of [`Coordinates::matricize`].
    pub fn from_matricized(bp: &Bipartition, m: &DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = (bp.m_alpha().pow(2), bp.n_alpha_bar().pow(2));
        if m.nrows() != rows || m.ncols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} coordinate matrix, expected {rows}x{cols}",
                m.nrows(),
                m.ncols()
            )));
        }
        let perm = coordinate_permutation(bp);
        let mut values = DVector::zeros(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values[perm[r * cols + c]] = m[(r, c)];
            }
        }
        Ok(Self {
            dims: bp.dims().to_vec(),
            values,
        })
    }

    fn check_bipartition(&self, bp: &Bipartition) -> Result<()> {
        if bp.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "bipartition over {:?}, operator over {:?}",
                bp.dims(),
                self.dims
            )));
        }
        Ok(())
    }
}

fn coordinate_permutation(bp: &Bipartition) -> Vec<usize> {
    let squared: Vec<usize> = bp.dims().iter().map(|d| d * d).collect();
    party_permutation(&squared, &bp.party_order())
}

/// Rearranges `X[(i_0..i_N), (j_0..j_N)]` into a tensor whose slot `p` is the
/// pair `(i_p, j_p)` flattened as `i_p * d_p + j_p`.
fn vectorize_per_party(x: &CMatrix, dims: &[usize]) -> Vec<Complex64> {
    let d = x.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            out[per_party_index(r, c, dims)] = x[(r, c)];
        }
    }
    out
}

fn devectorize_per_party(t: &[Complex64], dims: &[usize]) -> CMatrix {
    let d: usize = dims.iter().product();
    CMatrix::from_fn(d, d, |r, c| t[per_party_index(r, c, dims)])
}

fn per_party_index(mut r: usize, mut c: usize, dims: &[usize]) -> usize {
    let mut idx = 0;
    let mut stride = 1;
    for &dp in dims.iter().rev() {
        let (i, j) = (r % dp, c % dp);
        r /= dp;
        c /= dp;
        idx += (i * dp + j) * stride;
        stride *= dp * dp;
    }
    idx
}

/// Applies `mat` to tensor mode `mode`; `shape[mode]` must equal `mat.ncols()`.
fn mode_product(data: &[Complex64], shape: &[usize], mode: usize, mat: &CMatrix) -> Vec<Complex64> {
    let outer: usize = shape[..mode].iter().product();
    let inner: usize = shape[mode + 1..].iter().product();
    let (rows, cols) = (mat.nrows(), mat.ncols());
    debug_assert_eq!(shape[mode], cols);
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        for b in 0..cols {
            let src = &data[(o * cols + b) * inner..(o * cols + b + 1) * inner];
            for a in 0..rows {
                let w = mat[(a, b)];
                if w.re == 0.0 && w.im == 0.0 {
                    continue;
                }
                let dst = &mut out[(o * rows + a) * inner..(o * rows + a + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    out
}

/// Largest `|Tr(G_i^dagger G_j) - delta_ij|` over a family.
pub fn gram_residual(ops: &[HermitianOperator]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.hs_inner(b) - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Extends an orthonormal family of `dim x dim` Hermitian operators to a full
/// orthonormal basis of `dim^2` operators. The input operators come first and
/// are returned unchanged; the rest are drawn by Gram-Schmidt from the local
/// identity/Gell-Mann product basis on the operators' party structure.
pub fn complete_operator_basis(partial: &[HermitianOperator], dim: usize) -> Result<Vec<HermitianOperator>> {
    let dims = match partial.first() {
        Some(op) => op.dims().to_vec(),
        None => vec![dim],
    };
    if partial.iter().any(|op| op.dim() != dim || op.dims() != dims.as_slice()) {
        return Err(Error::DimensionMismatch(format!(
            "operators must all be {dim}x{dim} over the same parties"
        )));
    }
    if partial.len() > dim * dim {
        return Err(Error::InvalidParameter(format!(
            "{} operators exceed the operator-space dimension {}",
            partial.len(),
            dim * dim
        )));
    }
    let residual = gram_residual(partial);
    if residual > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(residual));
    }
    let space = dim * dim;
    let mut cols = DMatrix::zeros(space, partial.len());
    for (k, op) in partial.iter().enumerate() {
        cols.set_column(k, Coordinates::from_operator(op).values());
    }
    let full = complete_orthonormal_columns(&cols);
    let mut out = partial.to_vec();
    for k in partial.len()..space {
        let coords = Coordinates {
            dims: dims.clone(),
            values: full.column(k).into_owned(),
        };
        out.push(coords.to_operator());
    }
    Ok(out)
}

/// Extends orthonormal columns to a square orthogonal matrix, keeping the
/// given columns in place. Candidates are the unit vectors, tried in order of
/// how much of them lies outside the current span.
pub(crate) fn complete_orthonormal_columns(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let mut basis: Vec<DVector<f64>> = q.column_iter().map(|c| c.into_owned()).collect();
    while basis.len() < n {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for a in 0..n {
            let mut v = DVector::zeros(n);
            v[a] = 1.0;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dot(&v);
                    v.axpy(-proj, b, 1.0);
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn + 1e-12) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("nonempty candidate set");
        basis.push(v.unscale(norm));
    }
    DMatrix::from_columns(&basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{tensor_product, PureState};

    #[test]
    fn local_basis_is_orthonormal_and_hermitian() {
        for d in 2..=4 {
            let ops: Vec<HermitianOperator> = local_basis(d)
                .iter()
                .map(|m| HermitianOperator::new(vec![d], m.clone()).unwrap())
                .collect();
            assert_eq!(ops.len(), d * d);
            assert!(gram_residual(&ops) < 1e-14);
        }
    }

    #[test]
    fn qubit_basis_is_scaled_pauli() {
        let b = local_basis(2);
        let h = 0.5f64.sqrt();
        assert!((b[1][(0, 1)].re - h).abs() < 1e-15);
        assert!((b[2][(1, 0)].im - h).abs() < 1e-15);
        assert!((b[3][(1, 1)].re + h).abs() < 1e-15);
    }

    #[test]
    fn coordinates_round_trip_and_trace() {
        let t = 1.0 / 3f64.sqrt();
        let w = PureState::from_kets(&[2, 3], &[("02", t), ("11", t), ("10", -t)]).unwrap();
        let x = w.projector();
        let c = Coordinates::from_operator(&x);
        assert!((c.trace() - 1.0).abs() < 1e-14);
        assert!((c.to_operator().data() - x.data()).norm() < 1e-14);
        assert!((c.norm() - x.frobenius_norm()).abs() < 1e-14);
    }

    #[test]
    fn coordinate_dot_is_hs_product() {
        let a = HermitianOperator::from_real(vec![2], &DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.7])).unwrap();
        let b = HermitianOperator::identity(&[3]).scaled(0.2);
        let ab = tensor_product(&a, &b);
        let ca = Coordinates::from_operator(&ab);
        let id = Coordinates::from_operator(&HermitianOperator::identity(&[2, 3]));
        assert!((ca.dot(&id) - ab.trace()).abs() < 1e-14);
    }

    #[test]
    fn matricize_round_trip() {
        let t = 0.5;
        let psi = PureState::from_kets(&[2, 2, 2], &[("000", t), ("011", t), ("101", t), ("110", -t)]).unwrap();
        let c = Coordinates::from_operator(&psi.projector());
        let bp = Bipartition::new(&[1], &[2, 2, 2]).unwrap();
        let m = c.matricize(&bp).unwrap();
        assert_eq!(m.shape(), (4, 16));
        assert_eq!(Coordinates::from_matricized(&bp, &m).unwrap(), c);
    }

    #[test]
    fn identity_completes_to_pauli_span() {
        let id = HermitianOperator::identity(&[2]).scaled(0.5f64.sqrt());
        let full = complete_operator_basis(std::slice::from_ref(&id), 2).unwrap();
        assert_eq!(full.len(), 4);
        assert_eq!(full[0], id);
        assert!(gram_residual(&full) < 1e-12);
        assert!(full[1..].iter().all(|g| g.trace().abs() < 1e-12));
    }

    #[test]
    fn full_basis_is_unchanged() {
        let ops: Vec<HermitianOperator> = local_basis(3)
            .iter()
            .map(|m| HermitianOperator::new(vec![3], m.clone()).unwrap())
            .collect();
        assert_eq!(complete_operator_basis(&ops, 3).unwrap(), ops);
    }

    #[test]
    fn four_rotated_operators_in_dimension_four() {
        // Four orthonormal operators mixing several basis elements.
        let basis = local_basis(4);
        let rotated = |a: usize, b: usize, angle: f64| {
            let m = basis[a].scale(angle.cos()) + basis[b].scale(angle.sin());
            HermitianOperator::new(vec![4], m).unwrap()
        };
        let partial = vec![
            rotated(0, 15, 0.3),
            rotated(0, 15, 0.3 + std::f64::consts::FRAC_PI_2),
            rotated(2, 7, 1.1),
            rotated(9, 4, 0.4),
        ];
        assert!(gram_residual(&partial) < 1e-12);
        let full = complete_operator_basis(&partial, 4).unwrap();
        assert_eq!(full.len(), 16);
        assert!(gram_residual(&full) < 1e-9);
        assert_eq!(&full[..4], partial.as_slice());
    }

    #[test]
    fn completion_rejects_non_orthonormal() {
        let a = HermitianOperator::identity(&[2]);
        assert!(matches!(
            complete_operator_basis(&[a], 2),
            Err(Error::NotOrthonormal(_))
        ));
    }
}
