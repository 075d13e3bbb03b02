//! Coordinate-space implementation of the two update rules.
//!
//! Operators are kept as real coordinate vectors in the product Hermitian
//! basis. Target and noise matricizations are cached per bipartition, so an
//! update costs a handful of small dense products.

use nalgebra::{DMatrix, DVector};

use crate::basis::Coordinates;
use crate::bipartition::{enumerate_bipartitions, Bipartition};
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::osd::{leading_singular_value, CoefficientSvd};
use crate::witness::{argmax_with_ties, visibility_from_values, Visibility};

/// Gram residual above which rotated operators are re-orthonormalized.
pub const REORTHONORMALIZE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Fixed target and noise together with per-bipartition caches.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub dims: Vec<usize>,
    pub bipartitions: Vec<Bipartition>,
    pub rho: DVector<f64>,
    pub sigma: DVector<f64>,
    rho_m: Vec<DMatrix<f64>>,
    sigma_m: Vec<DMatrix<f64>>,
}

/// Witness quantities for one operator.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub offset: f64,
    pub critical: usize,
    /// `Tr(X rho)`
    pub r: f64,
    /// `Tr(X sigma)`
    pub s: f64,
    pub visibility: Visibility,
}

impl Problem {
    /// All canonical bipartitions for three or more parties; the single
    /// split for two.
    pub fn new(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Self> {
        if rho.dims() != sigma.dims() {
            return Err(Error::DimensionMismatch(format!(
                "target over {:?}, noise over {:?}",
                rho.dims(),
                sigma.dims()
            )));
        }
        let dims = rho.dims().to_vec();
        let bipartitions = enumerate_bipartitions(dims.len(), &dims)?;
        let rho_c = Coordinates::from_operator(rho);
        let sigma_c = Coordinates::from_operator(sigma);
        let rho_m = bipartitions
            .iter()
            .map(|bp| rho_c.matricize(bp))
            .collect::<Result<_>>()?;
        let sigma_m = bipartitions
            .iter()
            .map(|bp| sigma_c.matricize(bp))
            .collect::<Result<_>>()?;
        Ok(Self {
            dims,
            bipartitions,
            rho: rho_c.values().clone(),
            sigma: sigma_c.values().clone(),
            rho_m,
            sigma_m,
        })
    }

    pub fn coords(&self, x: &DVector<f64>) -> Coordinates {
        Coordinates::new(self.dims.clone(), x.clone()).expect("coordinate length fixed by problem")
    }

    pub fn trace(&self, x: &DVector<f64>) -> f64 {
        x[0] * self.dims.iter().map(|&d| (d as f64).sqrt()).product::<f64>()
    }

    pub fn leading_coefficients(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        let c = self.coords(x);
        self.bipartitions
            .iter()
            .map(|bp| leading_singular_value(&c.matricize(bp)?))
            .collect()
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<Evaluation> {
        let per = self.leading_coefficients(x)?;
        let critical = argmax_with_ties(per.iter().copied());
        let offset = per[critical];
        let (r, s) = (x.dot(&self.rho), x.dot(&self.sigma));
        let visibility = visibility_from_values(offset - r, offset - s)?;
        Ok(Evaluation {
            offset,
            critical,
            r,
            s,
            visibility,
        })
    }

    fn rebuild(&self, bp: usize, m: &DMatrix<f64>, reference: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = Coordinates::from_matricized(&self.bipartitions[bp], m)?
            .values()
            .clone();
        let (t0, t1) = (self.trace(reference), self.trace(&out));
        let ratio = t0 / t1;
        if ratio.is_finite() && ratio > 0.0 {
            out *= ratio;
        }
        Ok(out)
    }

    /// Decomposition of `x` across bipartition `bp` with the projections
    /// `rho~_i`, `sigma~_i` of target and noise on each product term.
    pub fn decompose(&self, x: &DVector<f64>, bp: usize) -> Result<Decomposition> {
        let m = self.coords(x).matricize(&self.bipartitions[bp])?;
        let svd = CoefficientSvd::new(&m)?;
        let project = |target: &DMatrix<f64>| -> Vec<f64> {
            let tv = target * &svd.v;
            (0..svd.mu.len()).map(|i| svd.u.column(i).dot(&tv.column(i))).collect()
        };
        Ok(Decomposition {
            rho_t: project(&self.rho_m[bp]),
            sigma_t: project(&self.sigma_m[bp]),
            svd,
            bp,
        })
    }

    /// One Algorithm 1 update on the critical bipartition.
    pub fn step_osc(&self, x: &DVector<f64>, ev: &Evaluation, eps: f64) -> Result<DVector<f64>> {
        let d = self.decompose(x, ev.critical)?;
        let g = osc_gradient(&d.svd.mu, &d.rho_t, &d.sigma_t, ev.offset)?;
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(x.clone());
        }
        let mu: Vec<f64> = d.svd.mu.iter().zip(&g).map(|(m, gi)| m - eps * gi / norm).collect();
        let m = &d.svd.u * DMatrix::from_diagonal(&DVector::from_vec(mu)) * d.svd.v.transpose();
        self.rebuild(d.bp, &m, x)
    }

    /// One Algorithm 2 update of the Schmidt operators on `side` of the
    /// critical bipartition.
    pub fn step_ops(&self, x: &DVector<f64>, ev: &Evaluation, side: Side, eps: f64) -> Result<DVector<f64>> {
        let d = self.decompose(x, ev.critical)?;
        let (a, b) = rotation_weights(ev.offset, ev.r, ev.s);
        let t = &self.rho_m[d.bp] * a + &self.sigma_m[d.bp] * b;
        let mu = DMatrix::from_diagonal(&DVector::from_column_slice(&d.svd.mu));
        // g: operators being rotated (columns), h: the fixed partners
        let (g, h, t) = match side {
            Side::A => (&d.svd.u, &d.svd.v, t),
            Side::B => (&d.svd.v, &d.svd.u, t.transpose()),
        };
        // column i: mu_i T h_i; gradient entries are overlaps G_k . w_i
        let w = &t * h * &mu;
        let inner = g.transpose() * &w;
        let outer = &w - g * &inner;
        let in_span = &inner - inner.transpose();
        let norm = (0.5 * in_span.norm_squared() + outer.norm_squared()).sqrt();
        if norm == 0.0 {
            return Ok(x.clone());
        }
        // G_i <- G_i - eps sum_k A_ik G_k with A the normalized generator mix
        let mut rotated = g - (g * in_span + outer) * (eps / norm);
        if gram_residual_columns(&rotated) > REORTHONORMALIZE_TOL {
            rotated = gram_schmidt(&rotated);
        }
        let m = match side {
            Side::A => &rotated * &mu * h.transpose(),
            Side::B => h * &mu * rotated.transpose(),
        };
        self.rebuild(d.bp, &m, x)
    }
}

pub(crate) struct Decomposition {
    pub svd: CoefficientSvd,
    pub rho_t: Vec<f64>,
    pub sigma_t: Vec<f64>,
    pub bp: usize,
}

/// Gradient of the required visibility with respect to the coefficients.
/// When the witness does not detect the target, the gradient of the
/// surrogate `(mu_1 - R) / (mu_1 - S)` is returned instead; it shares the
/// sign structure of `p = 1 / (1 - q)`.
pub(crate) fn osc_gradient(mu: &[f64], rho_t: &[f64], sigma_t: &[f64], mu1: f64) -> Result<Vec<f64>> {
    let r: f64 = mu.iter().zip(rho_t).map(|(m, x)| m * x).sum();
    let s: f64 = mu.iter().zip(sigma_t).map(|(m, x)| m * x).sum();
    let den = r - s;
    let delta = |j: usize| if j == 0 { 1.0 } else { 0.0 };
    if den > 0.0 && r > mu1 {
        let num = mu1 - s;
        return Ok((0..mu.len())
            .map(|j| ((delta(j) - sigma_t[j]) * den - (rho_t[j] - sigma_t[j]) * num) / (den * den))
            .collect());
    }
    let q_den = mu1 - s;
    if q_den == 0.0 {
        return Err(Error::DegenerateVisibility);
    }
    Ok((0..mu.len())
        .map(|j| ((delta(j) - rho_t[j]) * q_den - (delta(j) - sigma_t[j]) * (mu1 - r)) / (q_den * q_den))
        .collect())
}

/// Weights `(a, b)` with `grad_l = a dR_l + b dS_l` for rotation parameters,
/// holding the offset fixed. Uses the surrogate when not detecting.
pub(crate) fn rotation_weights(offset: f64, r: f64, s: f64) -> (f64, f64) {
    let den = if r > offset { r - s } else { offset - s };
    let den2 = den * den;
    (-(offset - s) / den2, (offset - r) / den2)
}

fn gram_residual_columns(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    (gram - DMatrix::identity(m.ncols(), m.ncols())).amax()
}

/// Classical Gram-Schmidt (two passes) over the columns, in order.
pub(crate) fn gram_schmidt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        let mut v = out.column(j).into_owned();
        for _ in 0..2 {
            for k in 0..j {
                let proj = out.column(k).dot(&v);
                v.axpy(-proj, &out.column(k), 1.0);
            }
        }
        let n = v.norm();
        if n > 0.0 {
            v /= n;
        }
        out.set_column(j, &v);
    }
    out
}
