//! Operator Schmidt decomposition `X = sum_i mu_i G_i^A (x) G_i^B`.
//!
//! The decomposition is the SVD of the realignment of `X`. It is computed in
//! the Hermitian product basis of [`crate::basis`], where the realignment is
//! a real matrix: singular vectors are then real coordinate vectors and the
//! Schmidt operators come out Hermitian even when coefficients are
//! degenerate.

use nalgebra::{DMatrix, DVector};

use crate::basis::Coordinates;
use crate::bipartition::Bipartition;
use crate::error::{Error, Result};
use crate::operator::{hermiticity_residual, HermitianOperator};
use crate::states::random_density;

/// Coefficients below this fraction of `mu_1` do not count towards
/// [`OperatorSchmidtDecomposition::effective_rank`].
pub const EFFECTIVE_RANK_TOL: f64 = 1e-10;

/// Largest tolerated Hermiticity residual of a reshaped Schmidt operator.
pub const SCHMIDT_HERMITICITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct OperatorSchmidtDecomposition {
    mu: Vec<f64>,
    ops_a: Vec<HermitianOperator>,
    ops_b: Vec<HermitianOperator>,
    bipartition: Bipartition,
    coords_a: DMatrix<f64>,
    coords_b: DMatrix<f64>,
}

impl OperatorSchmidtDecomposition {
    /// Operator Schmidt coefficients, decreasing. All `min(m^2, n^2)` are
    /// kept, including zeros.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu1(&self) -> f64 {
        self.mu[0]
    }

    pub fn ops_a(&self) -> &[HermitianOperator] {
        &self.ops_a
    }

    pub fn ops_b(&self) -> &[HermitianOperator] {
        &self.ops_b
    }

    pub fn bipartition(&self) -> &Bipartition {
        &self.bipartition
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Number of coefficients above `1e-10 * mu_1`.
    pub fn effective_rank(&self) -> usize {
        let cut = EFFECTIVE_RANK_TOL * self.mu1();
        self.mu.iter().filter(|&&m| m > cut).count()
    }

    /// `sum_i mu_i`, the realignment trace norm.
    pub fn coefficient_sum(&self) -> f64 {
        self.mu.iter().sum()
    }

    /// Coordinates of the alpha-side operators as columns.
    pub fn coords_a(&self) -> &DMatrix<f64> {
        &self.coords_a
    }

    pub fn coords_b(&self) -> &DMatrix<f64> {
        &self.coords_b
    }

    /// `sum_i c_i G_i^A (x) G_i^B` for arbitrary weights `c`.
    pub fn recombine(&self, weights: &[f64]) -> Result<HermitianOperator> {
        if weights.len() != self.mu.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} Schmidt terms",
                weights.len(),
                self.mu.len()
            )));
        }
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(weights));
        let m = &self.coords_a * w * self.coords_b.transpose();
        Ok(Coordinates::from_matricized(&self.bipartition, &m)?.to_operator())
    }

    /// `sum_i mu_i G_i^A (x) G_i^B`.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.recombine(&self.mu).expect("weights match coefficients")
    }
}

/// Decomposes `x` across `bp`.
pub fn osd(x: &HermitianOperator, bp: &Bipartition) -> Result<OperatorSchmidtDecomposition> {
    if x.dims() != bp.dims() {
        return Err(Error::DimensionMismatch(format!(
            "operator over {:?}, bipartition over {:?}",
            x.dims(),
            bp.dims()
        )));
    }
    let coords = Coordinates::from_operator(x);
    let matrix = coords.matricize(bp)?;
    let svd = CoefficientSvd::new(&matrix)?;
    let alpha_dims = bp.alpha_dims();
    let complement_dims = bp.complement_dims();
    let to_ops = |cols: &DMatrix<f64>, dims: &[usize]| -> Result<Vec<HermitianOperator>> {
        cols.column_iter()
            .enumerate()
            .map(|(index, col)| {
                let op = Coordinates::new(dims.to_vec(), col.into_owned())?.to_operator();
                let residual = hermiticity_residual(op.data());
                if residual > SCHMIDT_HERMITICITY_TOL {
                    return Err(Error::NonHermitianSchmidtOperator { index, residual });
                }
                Ok(op)
            })
            .collect()
    };
    Ok(OperatorSchmidtDecomposition {
        ops_a: to_ops(&svd.u, &alpha_dims)?,
        ops_b: to_ops(&svd.v, &complement_dims)?,
        mu: svd.mu,
        bipartition: bp.clone(),
        coords_a: svd.u,
        coords_b: svd.v,
    })
}

/// Decomposes after mixing in a small random density matrix.
pub fn osd_symmetry_broken(
    x: &HermitianOperator,
    bp: &Bipartition,
    breaking: SymmetryBreaking,
) -> Result<OperatorSchmidtDecomposition> {
    osd(&breaking.apply(x)?, bp)
}

/// `(1 - eps) X + eps rho_random` with a seeded random density matrix.
/// Splits degenerate coefficients so the decomposition becomes unique.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryBreaking {
    pub eps: f64,
    pub seed: u64,
}

impl Default for SymmetryBreaking {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            seed: 0x5EED,
        }
    }
}

impl SymmetryBreaking {
    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if self.eps == 0.0 {
            return Ok(x.clone());
        }
        let noise = random_density(x.dims(), self.seed);
        x.combine(1.0 - self.eps, &noise, self.eps)
    }
}

/// Sorted thin SVD `M = U diag(mu) V^T` of a real coordinate matrix with a
/// deterministic sign convention: the largest-magnitude entry of each column
/// of `U` is positive.
#[derive(Debug, Clone)]
pub(crate) struct CoefficientSvd {
    pub u: DMatrix<f64>,
    pub mu: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl CoefficientSvd {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let (u, s, v) = crate::linalg::svd(m)?;
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
        let mut su = DMatrix::zeros(u.nrows(), order.len());
        let mut sv = DMatrix::zeros(v.nrows(), order.len());
        let mut mu = Vec::with_capacity(order.len());
        for (k, &i) in order.iter().enumerate() {
            let mut ucol = u.column(i).into_owned();
            let mut vcol = v.column(i).into_owned();
            let pivot = ucol.iamax();
            if ucol[pivot] < 0.0 {
                ucol.neg_mut();
                vcol.neg_mut();
            }
            su.set_column(k, &ucol);
            sv.set_column(k, &vcol);
            mu.push(s[i].max(0.0));
        }
        Ok(Self { u: su, mu, v: sv })
    }
}

/// Largest singular value of a real coordinate matrix.
pub(crate) fn leading_singular_value(m: &DMatrix<f64>) -> Result<f64> {
    crate::linalg::largest_singular_value(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::gram_residual;
    use crate::operator::PureState;
    use approx::assert_abs_diff_eq;

    fn bp22() -> Bipartition {
        Bipartition::new(&[0], &[2, 2]).unwrap()
    }

    #[test]
    fn bell_state_has_four_equal_coefficients() {
        let h = 0.5f64.sqrt();
        let bell = PureState::from_kets(&[2, 2], &[("00", h), ("11", h)]).unwrap();
        let d = osd(&bell.projector(), &bp22()).unwrap();
        for &m in d.mu() {
            assert_abs_diff_eq!(m, 0.5, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(d.mu1(), 0.5, epsilon = 1e-14);
        assert!(gram_residual(d.ops_a()) < 1e-12);
        assert!(gram_residual(d.ops_b()) < 1e-12);
        assert!((d.reconstruct().data() - bell.projector().data()).norm() < 1e-13);
    }

    #[test]
    fn product_projector_has_rank_one() {
        let zero = PureState::from_kets(&[2, 2], &[("00", 1.0)]).unwrap();
        let d = osd(&zero.projector(), &bp22()).unwrap();
        assert_abs_diff_eq!(d.mu()[0], 1.0, epsilon = 1e-14);
        assert!(d.mu()[1..].iter().all(|&m| m.abs() < 1e-14));
        assert_eq!(d.effective_rank(), 1);
    }

    #[test]
    fn partially_entangled_coefficients_are_schmidt_products() {
        let psi = PureState::from_kets(&[2, 2], &[("00", 0.8f64.sqrt()), ("11", 0.2f64.sqrt())]).unwrap();
        let d = osd(&psi.projector(), &bp22()).unwrap();
        let expected = [0.8, 0.4, 0.4, 0.2];
        for (m, e) in d.mu().iter().zip(expected) {
            assert_abs_diff_eq!(*m, e, epsilon = 1e-13);
        }
    }

    #[test]
    fn unequal_dimensions_truncate_to_smaller_side() {
        let t = 1.0 / 3f64.sqrt();
        let psi = PureState::from_kets(&[2, 2, 2], &[("001", t), ("010", t), ("100", t)]).unwrap();
        let bp = Bipartition::new(&[0], &[2, 2, 2]).unwrap();
        let d = osd(&psi.projector(), &bp).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.ops_a()[0].dims(), &[2]);
        assert_eq!(d.ops_b()[0].dims(), &[2, 2]);
        // Schmidt coefficients sqrt(2/3), sqrt(1/3)
        assert_abs_diff_eq!(d.mu1(), 2.0 / 3.0, epsilon = 1e-13);
        assert!((d.reconstruct().data() - psi.projector().data()).norm() < 1e-13);
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let psi = PureState::from_kets(&[2, 2], &[("00", 0.6), ("01", 0.0), ("11", 0.8)]).unwrap();
        let a = osd(&psi.projector(), &bp22()).unwrap();
        let b = osd(&psi.projector(), &bp22()).unwrap();
        assert_eq!(a.coords_a(), b.coords_a());
        for col in a.coords_a().column_iter() {
            assert!(col[col.iamax()] > 0.0);
        }
    }

    #[test]
    fn symmetry_breaking_splits_degeneracy() {
        let h = 0.5f64.sqrt();
        let bell = PureState::from_kets(&[2, 2], &[("00", h), ("11", h)]).unwrap();
        let d = osd_symmetry_broken(&bell.projector(), &bp22(), SymmetryBreaking::default()).unwrap();
        let gaps: Vec<f64> = d.mu().windows(2).map(|w| w[0] - w[1]).collect();
        assert!(gaps.iter().all(|&g| g > 1e-9), "gaps {gaps:?}");
        assert!(gaps.iter().all(|&g| g < 1e-3));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = HermitianOperator::identity(&[2, 3]);
        assert!(osd(&x, &bp22()).is_err());
    }
}
