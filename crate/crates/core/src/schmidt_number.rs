//! Schmidt-number witnesses `W = lambda_k * 1 - X`.
//!
//! `lambda_k` is the maximum of `Tr(X |psi><psi|)` over states of Schmidt
//! rank `k - 1`. With operator Schmidt coefficients `mu` it reduces to
//! maximizing `sum_j mu_j tau_j` over unit Schmidt vectors `s`, where `tau`
//! lists the products `s_a s_b` in decreasing order.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bipartition::Bipartition;
use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, PureState, NORMALIZATION_TOL};
use crate::osd::osd;
use crate::witness::{Witness, WitnessKind};

/// Slack allowed when checking that coefficients decrease.
const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaMethod {
    /// `k = 2`: the leading coefficient.
    Leading,
    ClosedForm3,
    EigenMatrices4,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtNumberCoefficient {
    pub k: usize,
    pub lambda: f64,
    pub method: LambdaMethod,
    /// Maximizing Schmidt vector, decreasing and nonnegative.
    pub maximizer: Vec<f64>,
}

fn validate(mu: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "Schmidt number k must be >= 2, got {k}"
        )));
    }
    if mu.iter().any(|&m| m < -ORDER_TOL || !m.is_finite()) {
        return Err(Error::InvalidParameter(
            "coefficients must be finite and nonnegative".into(),
        ));
    }
    if mu.windows(2).any(|w| w[1] > w[0] + ORDER_TOL) {
        return Err(Error::UnsortedCoefficients);
    }
    let need = (k - 1) * (k - 1);
    let mut padded = mu.to_vec();
    if padded.len() < need {
        log::debug!("zero-padding {} coefficients to {need}", padded.len());
        padded.resize(need, 0.0);
    }
    Ok(padded)
}

/// Closed-form `lambda_k` for `k` in `{2, 3, 4}`.
pub fn lambda_k(mu: &[f64], k: usize) -> Result<SchmidtNumberCoefficient> {
    if !(2..=4).contains(&k) {
        return Err(Error::UnsupportedSchmidtNumber(k));
    }
    let mu = validate(mu, k)?;
    let m = |i: usize| mu[i - 1];
    let (lambda, method, maximizer) = match k {
        2 => (m(1), LambdaMethod::Leading, vec![1.0]),
        3 => {
            let b = 0.5 * (m(2) + m(3));
            let lambda = 0.5 * (m(1) + m(4) + ((m(1) - m(4)).powi(2) + (m(2) + m(3)).powi(2)).sqrt());
            // eigenvector of [[mu1, b], [b, mu4]]; pick the better-conditioned form
            let (v1, v2) = ([b, lambda - m(1)], [lambda - m(4), b]);
            let norm2 = |v: &[f64; 2]| v[0] * v[0] + v[1] * v[1];
            let v = if norm2(&v1) >= norm2(&v2) { v1 } else { v2 };
            let v = if norm2(&v) > 0.0 { v } else { [1.0, 0.0] };
            (lambda, LambdaMethod::ClosedForm3, normalized_positive(&v))
        }
        _ => {
            let m1 = DMatrix::from_row_slice(3, 3, &[m(1), m(2), m(4), m(3), m(6), m(7), m(5), m(8), m(9)]);
            let m2 = DMatrix::from_row_slice(3, 3, &[m(1), m(2), m(5), m(3), m(4), m(7), m(6), m(8), m(9)]);
            let (l1, v1) = top_eigenpair(&m1);
            let (l2, v2) = top_eigenpair(&m2);
            let (lambda, v) = if l1 >= l2 { (l1, v1) } else { (l2, v2) };
            (lambda, LambdaMethod::EigenMatrices4, normalized_positive(&v))
        }
    };
    Ok(SchmidtNumberCoefficient {
        k,
        lambda,
        method,
        maximizer,
    })
}

fn top_eigenpair(m: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let (vals, vecs) = crate::linalg::symmetric_eigen(m).expect("3x3 symmetric eigenproblem");
    let i = vals.imax();
    (vals[i], vecs.column(i).iter().copied().collect())
}

fn normalized_positive(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut out: Vec<f64> = v.iter().map(|x| (x / n).abs()).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// `sum_j mu_j tau_j` for a Schmidt vector `s`.
pub fn schmidt_objective(mu: &[f64], s: &[f64]) -> f64 {
    let mut tau: Vec<f64> = s.iter().flat_map(|a| s.iter().map(move |b| a * b)).collect();
    tau.sort_by(|a, b| b.total_cmp(a));
    mu.iter().zip(&tau).map(|(m, t)| m * t).sum()
}

/// Spherical coordinates in the positive orthant.
fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let mut s = Vec::with_capacity(angles.len() + 1);
    let mut radius = 1.0;
    for &a in angles {
        s.push(radius * a.cos());
        radius *= a.sin();
    }
    s.push(radius);
    s
}

/// Numerical `lambda_k` for any `k >= 2`: a grid over the positive unit
/// sphere with angular spacing `grid`, then 50 rounds of coordinate ascent
/// with a shrinking step. The result is a lower bound on the true value.
pub fn lambda_k_bruteforce(mu: &[f64], k: usize, grid: f64) -> Result<SchmidtNumberCoefficient> {
    if !(grid > 0.0 && grid <= 0.1) {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must lie in (0, 0.1], got {grid}"
        )));
    }
    let mu = validate(mu, k)?;
    let r = k - 1;
    if r == 1 {
        return Ok(SchmidtNumberCoefficient {
            k,
            lambda: mu[0],
            method: LambdaMethod::BruteForce,
            maximizer: vec![1.0],
        });
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let steps = (half_pi / grid).ceil() as usize;
    let axis: Vec<f64> = (0..=steps).map(|i| half_pi * i as f64 / steps as f64).collect();
    let n_angles = r - 1;
    let total = axis.len().pow(n_angles as u32);
    let angles_of = |mut idx: usize| -> Vec<f64> {
        (0..n_angles)
            .map(|_| {
                let a = axis[idx % axis.len()];
                idx /= axis.len();
                a
            })
            .collect()
    };
    let (best_idx, _) = (0..total)
        .into_par_iter()
        .map(|i| (i, schmidt_objective(&mu, &sphere_point(&angles_of(i)))))
        .reduce(
            || (0, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    let mut angles = angles_of(best_idx);
    let mut value = schmidt_objective(&mu, &sphere_point(&angles));
    let mut step = half_pi / steps as f64;
    for _ in 0..50 {
        let mut improved = false;
        for j in 0..n_angles {
            for dir in [1.0, -1.0] {
                let mut trial = angles.clone();
                trial[j] = (trial[j] + dir * step).clamp(0.0, half_pi);
                let v = schmidt_objective(&mu, &sphere_point(&trial));
                if v > value {
                    value = v;
                    angles = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let mut s = sphere_point(&angles);
    s.iter_mut().for_each(|x| *x = x.abs());
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(SchmidtNumberCoefficient {
        k,
        lambda: value,
        method: LambdaMethod::BruteForce,
        maximizer: s,
    })
}

/// `lambda_k(mu(X)) * 1 - X`. A negative expectation certifies Schmidt
/// number at least `k`.
pub fn sn_witness(x: &HermitianOperator, bp: &Bipartition, k: usize) -> Result<Witness> {
    let d = osd(x, bp)?;
    let coeff = lambda_k(d.mu(), k)?;
    Ok(Witness::from_parts(
        coeff.lambda,
        x.clone(),
        WitnessKind::SchmidtNumber(k),
        None,
    ))
}

/// Like [`sn_witness`] but with the brute-force coefficient, for `k >= 5`.
/// The result is flagged heuristic since its offset may be too small.
pub fn sn_witness_heuristic(x: &HermitianOperator, bp: &Bipartition, k: usize, grid: f64) -> Result<Witness> {
    let d = osd(x, bp)?;
    let coeff = lambda_k_bruteforce(d.mu(), k, grid)?;
    Ok(Witness::from_parts(coeff.lambda, x.clone(), WitnessKind::SchmidtNumber(k), None).mark_heuristic())
}

/// Fidelity-type Schmidt-number witness: offset is the sum of the `k - 1`
/// largest squared Schmidt coefficients of `psi`.
pub fn fidelity_sn_witness(psi: &PureState, bp: &Bipartition, k: usize) -> Result<Witness> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "Schmidt number k must be >= 2, got {k}"
        )));
    }
    psi.ensure_normalized()?;
    let s = psi.schmidt_coefficients(bp)?;
    let offset = s.iter().take(k - 1).map(|x| x * x).sum();
    Ok(Witness::from_parts(
        offset,
        psi.projector(),
        WitnessKind::SchmidtNumber(k),
        None,
    ))
}

/// Whether the extended CCNR bound `sum_i mu_i <= k - 1` for Schmidt number
/// `k - 1` is violated, certifying Schmidt number at least `k`.
pub fn extended_ccnr_sn_check(rho: &HermitianOperator, bp: &Bipartition, k: usize) -> Result<bool> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "Schmidt number k must be >= 2, got {k}"
        )));
    }
    rho.ensure_state(NORMALIZATION_TOL)?;
    Ok(osd(rho, bp)?.coefficient_sum() > (k - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::state_by_name;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_examples() {
        let l = lambda_k(&[1.0, 1.0, 1.0, 1.0], 3).unwrap();
        assert_abs_diff_eq!(l.lambda, 2.0, epsilon = 1e-12);
        let l = lambda_k(&[0.5, 0.3, 0.2, 0.1], 3).unwrap();
        assert_abs_diff_eq!(l.lambda, (0.6 + 0.41f64.sqrt()) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            schmidt_objective(&[0.5, 0.3, 0.2, 0.1], &l.maximizer),
            l.lambda,
            epsilon = 1e-12
        );
        assert_eq!(lambda_k(&[0.7, 0.2], 2).unwrap().lambda, 0.7);
        assert_abs_diff_eq!(lambda_k(&[1.0; 9], 4).unwrap().lambda, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(lambda_k(&[1.0], 5), Err(Error::UnsupportedSchmidtNumber(5))));
        assert!(matches!(lambda_k(&[0.1, 0.5], 3), Err(Error::UnsortedCoefficients)));
        assert!(lambda_k_bruteforce(&[1.0], 3, 0.5).is_err());
    }

    #[test]
    fn padding_short_vectors() {
        let l = lambda_k(&[0.5], 3).unwrap();
        assert_abs_diff_eq!(l.lambda, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bruteforce_matches_closed_forms() {
        let mu = [0.5, 0.3, 0.2, 0.1];
        let b = lambda_k_bruteforce(&mu, 3, 0.01).unwrap();
        assert_abs_diff_eq!(b.lambda, lambda_k(&mu, 3).unwrap().lambda, epsilon = 1e-6);
        let b = lambda_k_bruteforce(&[1.0; 4], 3, 0.01).unwrap();
        assert_abs_diff_eq!(b.lambda, 2.0, epsilon = 1e-3);
        assert_eq!(lambda_k_bruteforce(&[0.8, 0.1], 2, 0.05).unwrap().lambda, 0.8);
        let mu4 = [0.4, 0.35, 0.3, 0.2, 0.15, 0.1, 0.08, 0.05, 0.01];
        let b = lambda_k_bruteforce(&mu4, 4, 0.02).unwrap();
        assert_abs_diff_eq!(b.lambda, lambda_k(&mu4, 4).unwrap().lambda, epsilon = 1e-6);
    }

    #[test]
    fn psi3_witnesses() {
        let psi = state_by_name("psi3:eps=0.1").unwrap().pure.unwrap();
        let bp = Bipartition::new(&[0], &[3, 3]).unwrap();
        let f = fidelity_sn_witness(&psi, &bp, 3).unwrap();
        assert_abs_diff_eq!(f.offset(), 0.99, epsilon = 1e-12);
        assert!(f.evaluate(&psi.projector()).unwrap() < 0.0);
        let w = sn_witness(&psi.projector(), &bp, 3).unwrap();
        assert!(w.offset() >= 0.99 - 1e-12);
        assert!(w.evaluate(&psi.projector()).unwrap() < 0.0);
        assert!(!extended_ccnr_sn_check(&psi.projector(), &bp, 3).unwrap());
    }

    #[test]
    fn maximally_entangled_qutrits_pass_extended_ccnr() {
        let phi = state_by_name("bell:3").unwrap().density;
        let bp = Bipartition::new(&[0], &[3, 3]).unwrap();
        assert!(extended_ccnr_sn_check(&phi, &bp, 3).unwrap());
        let white = HermitianOperator::maximally_mixed(&[3, 3]);
        assert!(!extended_ccnr_sn_check(&white, &bp, 2).unwrap());
    }
}
