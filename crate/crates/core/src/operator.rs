//! Dense Hermitian operators and pure states on multipartite Hilbert spaces.
//!
//! Basis ordering is big-endian: party 0 is the most significant index, so
//! the ket `|01>` is basis index 1 and `|10>` is basis index 2.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipartition::{party_permutation, Bipartition};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance on `||A - A^dagger||_F` accepted at construction.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// `||A - A^dagger||_F`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// A Hermitian matrix together with the local dimensions of the parties it
/// acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dims: Vec<usize>,
    data: CMatrix,
    label: String,
}

impl HermitianOperator {
    /// Validates shape and Hermiticity, then stores the exactly symmetrized
    /// matrix `(A + A^dagger) / 2`.
    pub fn new(dims: Vec<usize>, data: CMatrix) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || data.nrows() != total || data.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for local dimensions {dims:?}",
                data.nrows(),
                data.ncols()
            )));
        }
        let residual = hermiticity_residual(&data);
        if residual > HERMITICITY_TOL * data.norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        let data = (&data + data.adjoint()).scale(0.5);
        Ok(Self {
            dims,
            data,
            label: String::new(),
        })
    }

    pub fn from_real(dims: Vec<usize>, data: &DMatrix<f64>) -> Result<Self> {
        Self::new(dims, data.map(|v| Complex64::new(v, 0.0)))
    }

    pub(crate) fn from_hermitian_unchecked(dims: Vec<usize>, data: CMatrix) -> Self {
        debug_assert_eq!(data.nrows(), dims.iter().product::<usize>());
        Self {
            dims,
            data,
            label: String::new(),
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let d = dims.iter().product();
        Self::from_hermitian_unchecked(dims.to_vec(), CMatrix::identity(d, d)).with_label("identity")
    }

    /// The maximally mixed state `1 / D`.
    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        Self::identity(dims).scaled(1.0 / d as f64).with_label("white noise")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Hilbert-Schmidt inner product `Tr(self^dagger other)`.
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        self.data.dotc(&other.data)
    }

    /// `Tr(self * rho)` for Hermitian arguments; always real.
    pub fn expectation(&self, rho: &Self) -> Result<f64> {
        self.check_same_shape(rho)?;
        Ok(self.data.dotc(&rho.data).re)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.scale(factor),
            label: self.label.clone(),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_hermitian_unchecked(
            self.dims.clone(),
            self.data.scale(a) + other.data.scale(b),
        ))
    }

    /// `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self> {
        self.combine(p, other, 1.0 - p)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev =
            crate::linalg::hermitian_eigenvalues(&self.data).expect("eigendecomposition of a Hermitian matrix");
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty operator")
    }

    /// Checks positive semidefiniteness and unit trace within `tol`.
    pub fn ensure_state(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::NotAState(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::NotAState(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn is_state(&self, tol: f64) -> bool {
        self.ensure_state(tol).is_ok()
    }

    /// Reorders the tensor factors; `order[k]` is the old party placed at
    /// position `k`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<Self> {
        check_party_order(order, self.n_parties())?;
        let perm = party_permutation(&self.dims, order);
        let d = self.dim();
        let data = CMatrix::from_fn(d, d, |r, c| self.data[(perm[r], perm[c])]);
        let dims = order.iter().map(|&p| self.dims[p]).collect();
        Ok(Self {
            dims,
            data,
            label: self.label.clone(),
        })
    }

    /// Transposes the indices of the listed parties.
    pub fn partial_transpose(&self, parties: &[usize]) -> Result<Self> {
        if let Some(&p) = parties.iter().find(|&&p| p >= self.n_parties()) {
            return Err(Error::InvalidParties(format!("party {p} out of range")));
        }
        let n = self.n_parties();
        let d = self.dim();
        let digits = |mut idx: usize| {
            let mut out = vec![0usize; n];
            for p in (0..n).rev() {
                out[p] = idx % self.dims[p];
                idx /= self.dims[p];
            }
            out
        };
        let compose = |ds: &[usize]| ds.iter().zip(&self.dims).fold(0, |acc, (&x, &dim)| acc * dim + x);
        let mut data = CMatrix::zeros(d, d);
        for r in 0..d {
            let rd = digits(r);
            for c in 0..d {
                let mut nr = rd.clone();
                let mut nc = digits(c);
                for &p in parties {
                    std::mem::swap(&mut nr[p], &mut nc[p]);
                }
                data[(compose(&nr), compose(&nc))] = self.data[(r, c)];
            }
        }
        Ok(Self::from_hermitian_unchecked(self.dims.clone(), data))
    }

    pub fn to_json(&self) -> MatrixFile {
        MatrixFile::from_matrix(&self.dims, &self.data)
    }

    pub fn from_json(file: &MatrixFile) -> Result<Self> {
        Self::new(file.dims.clone(), file.to_matrix()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: MatrixFile = serde_json::from_str(&text)?;
        Self::from_json(&file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_json())?)?;
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(())
    }
}

fn check_party_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidParties(format!("order {order:?} for {n} parties")));
    }
    for &p in order {
        if p >= n || seen[p] {
            return Err(Error::InvalidParties(format!("order {order:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// On-disk matrix format: `{"dims": [..], "re": [[..]], "im": [[..]]}`,
/// row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(dims: &[usize], m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            dims: dims.to_vec(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.re.len();
        let square = |rows: &[Vec<f64>]| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !square(&self.re) || !square(&self.im) {
            return Err(Error::DimensionMismatch(
                "matrix file rows are ragged or not square".into(),
            ));
        }
        Ok(CMatrix::from_fn(n, n, |r, c| {
            Complex64::new(self.re[r][c], self.im[r][c])
        }))
    }
}

/// A pure state vector over `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: CVector,
    label: String,
}

/// Allowed deviation of `||psi||` from one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for local dimensions {dims:?}",
                amplitudes.len()
            )));
        }
        Ok(Self {
            dims,
            amplitudes,
            label: String::new(),
        })
    }

    /// Builds a state from `(ket, amplitude)` pairs where each ket string
    /// lists one digit per party, e.g. `"0101"`.
    pub fn from_kets(dims: &[usize], terms: &[(&str, f64)]) -> Result<Self> {
        let mut amps = CVector::zeros(dims.iter().product());
        for (ket, amp) in terms {
            let digits: Vec<usize> = ket
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::InvalidParameter(format!("bad ket {ket:?}")))?;
            if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&x, &d)| x >= d) {
                return Err(Error::InvalidParameter(format!("ket {ket:?} does not fit {dims:?}")));
            }
            let idx = digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x);
            amps[idx] += Complex64::new(*amp, 0.0);
        }
        Self::new(dims.to_vec(), amps)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    pub fn normalized(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.unscale(self.norm()),
            label: self.label.clone(),
        }
    }

    /// The projector `|psi><psi|`.
    pub fn projector(&self) -> HermitianOperator {
        let data = &self.amplitudes * self.amplitudes.adjoint();
        HermitianOperator::from_hermitian_unchecked(self.dims.clone(), data).with_label(self.label.clone())
    }

    /// `<psi| X |psi>`.
    pub fn expectation(&self, x: &HermitianOperator) -> Result<f64> {
        if x.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", x.dims(), self.dims)));
        }
        Ok(self.amplitudes.dotc(&(x.data() * &self.amplitudes)).re)
    }

    /// Vector Schmidt coefficients across `bp`, decreasing.
    pub fn schmidt_coefficients(&self, bp: &Bipartition) -> Result<Vec<f64>> {
        if bp.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "bipartition over {:?} for state over {:?}",
                bp.dims(),
                self.dims
            )));
        }
        let perm = bp.index_permutation();
        let (m, n) = (bp.m_alpha(), bp.n_alpha_bar());
        let coeffs = CMatrix::from_fn(m, n, |i, k| self.amplitudes[perm[i * n + k]]);
        let mut s = crate::linalg::complex_singular_values(&coeffs)?;
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        Self {
            dims,
            amplitudes,
            label: String::new(),
        }
    }
}

/// Kronecker product with concatenated party lists.
pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let dims = a.dims.iter().chain(&b.dims).copied().collect();
    HermitianOperator::from_hermitian_unchecked(dims, a.data.kronecker(&b.data))
}

/// Traces out every party not listed in `keep`; the result's parties are the
/// kept ones in increasing order.
pub fn partial_trace(x: &HermitianOperator, keep: &[usize]) -> Result<HermitianOperator> {
    let n = x.n_parties();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::InvalidParties("keep set is empty".into()));
    }
    if let Some(&p) = keep.iter().find(|&&p| p >= n) {
        return Err(Error::InvalidParties(format!("party {p} out of range 0..{n}")));
    }
    if keep.len() == n {
        return Ok(x.clone());
    }
    let traced: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
    let order: Vec<usize> = keep.iter().chain(&traced).copied().collect();
    let perm = party_permutation(&x.dims, &order);
    let kd: usize = keep.iter().map(|&p| x.dims[p]).product();
    let td: usize = traced.iter().map(|&p| x.dims[p]).product();
    let data = CMatrix::from_fn(kd, kd, |i, j| {
        (0..td).map(|k| x.data[(perm[i * td + k], perm[j * td + k])]).sum()
    });
    let dims = keep.iter().map(|&p| x.dims[p]).collect();
    Ok(HermitianOperator::from_hermitian_unchecked(dims, data))
}

/// Realignment across `bp`: the `m^2 x n^2` matrix with entry
/// `<i k| X |i' k'>` at row `i*m + i'`, column `k*n + k'`, where `i, i'` index
/// the alpha side and `k, k'` the complement. Its singular values are the
/// operator Schmidt coefficients.
pub fn realign(x: &HermitianOperator, bp: &Bipartition) -> Result<CMatrix> {
    if x.dims() != bp.dims() {
        return Err(Error::DimensionMismatch(format!(
            "operator over {:?}, bipartition over {:?}",
            x.dims(),
            bp.dims()
        )));
    }
    let perm = bp.index_permutation();
    let (m, n) = (bp.m_alpha(), bp.n_alpha_bar());
    Ok(CMatrix::from_fn(m * m, n * n, |row, col| {
        let (i, ip) = (row / m, row % m);
        let (k, kp) = (col / n, col % n);
        x.data[(perm[i * n + k], perm[ip * n + kp])]
    }))
}
