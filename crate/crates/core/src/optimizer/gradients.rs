//! Public gradient and single-step entry points.
//!
//! The optimizer loop runs on [`super::engine`]; the functions here take and
//! return plain operators. [`grad_visibility_wrt_rotation`] builds the full
//! SO(N) generator set on a completed operator basis and serves as the
//! reference for the projected form used inside the loop.

use nalgebra::DMatrix;

use super::engine::{osc_gradient, rotation_weights, Problem, Side};
use super::OptimizerConfig;
use crate::basis::complete_orthonormal_columns;
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::osd::OperatorSchmidtDecomposition;

/// Generators of SO(n): `+1` at `(p, q)`, `-1` at `(q, p)` for `p < q`,
/// enumerated row-major.
pub fn so_generators(n: usize) -> Result<Vec<DMatrix<f64>>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("SO(n) needs n >= 2, got {n}")));
    }
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for p in 0..n {
        for q in p + 1..n {
            let mut g = DMatrix::zeros(n, n);
            g[(p, q)] = 1.0;
            g[(q, p)] = -1.0;
            out.push(g);
        }
    }
    Ok(out)
}

/// Gradient of `p_crit` with respect to the operator Schmidt coefficients,
/// with `mu_1` treated as the offset.
pub fn grad_visibility_wrt_mu(
    decomp: &OperatorSchmidtDecomposition,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
) -> Result<Vec<f64>> {
    let (rho_t, sigma_t) = projections(decomp, rho, sigma)?;
    let mu = decomp.mu();
    let r: f64 = mu.iter().zip(&rho_t).map(|(m, x)| m * x).sum();
    let s: f64 = mu.iter().zip(&sigma_t).map(|(m, x)| m * x).sum();
    if r - s == 0.0 {
        return Err(Error::DegenerateVisibility);
    }
    if r <= decomp.mu1() {
        return Err(Error::InvalidParameter("witness does not detect the target".into()));
    }
    osc_gradient(mu, &rho_t, &sigma_t, decomp.mu1())
}

/// `Tr[(G_i^A (x) G_i^B) rho]` and the same for `sigma`.
fn projections(
    decomp: &OperatorSchmidtDecomposition,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let bp = decomp.bipartition();
    let project = |x: &HermitianOperator| -> Result<Vec<f64>> {
        let m = crate::basis::Coordinates::from_operator(x).matricize(bp)?;
        let mv = m * decomp.coords_b();
        Ok((0..decomp.len())
            .map(|i| decomp.coords_a().column(i).dot(&mv.column(i)))
            .collect())
    };
    if rho.dims() != bp.dims() || sigma.dims() != bp.dims() {
        return Err(Error::DimensionMismatch("states do not match the decomposition".into()));
    }
    Ok((project(rho)?, project(sigma)?))
}

/// Gradient of `p_crit` with respect to the rotation parameters of the
/// Schmidt operators on `side`, one entry per generator of
/// [`so_generators`]. The side's operators are first completed to a basis of
/// its operator space. The offset is held at `mu_1`.
pub fn grad_visibility_wrt_rotation(
    decomp: &OperatorSchmidtDecomposition,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    side: Side,
) -> Result<Vec<f64>> {
    let bp = decomp.bipartition();
    let mrho = crate::basis::Coordinates::from_operator(rho).matricize(bp)?;
    let msig = crate::basis::Coordinates::from_operator(sigma).matricize(bp)?;
    let (own, partner, mrho, msig) = match side {
        Side::A => (decomp.coords_a(), decomp.coords_b(), mrho, msig),
        Side::B => (decomp.coords_b(), decomp.coords_a(), mrho.transpose(), msig.transpose()),
    };
    let full = complete_orthonormal_columns(own);
    let n = full.ncols();
    let s_count = decomp.len();
    // R[i, k] = mu_i Tr[(G_k (x) H_i) rho] for i < S, zero below
    let fill = |m: &DMatrix<f64>| {
        let overlaps = full.transpose() * m * partner;
        DMatrix::from_fn(n, n, |i, k| {
            if i < s_count {
                decomp.mu()[i] * overlaps[(k, i)]
            } else {
                0.0
            }
        })
    };
    let (rm, sm) = (fill(&mrho), fill(&msig));
    let (r, s) = (rm.trace(), sm.trace());
    let (a, b) = rotation_weights(decomp.mu1(), r, s);
    if r <= decomp.mu1() {
        return Err(Error::InvalidParameter("witness does not detect the target".into()));
    }
    Ok(so_generators(n)?
        .iter()
        .map(|g| {
            let (p, q) = generator_plane(g);
            a * (rm[(p, q)] - rm[(q, p)]) + b * (sm[(p, q)] - sm[(q, p)])
        })
        .collect())
}

fn generator_plane(g: &DMatrix<f64>) -> (usize, usize) {
    let idx = g.iter().position(|&v| v == 1.0).expect("generator has a +1 entry");
    (idx % g.nrows(), idx / g.nrows())
}

/// Applies `O = 1 + sum_l e_l g^(l)` to the Schmidt operators on `side` and
/// rebuilds the operator, without renormalization. `e` has one entry per
/// generator.
pub fn rotate_schmidt_operators(
    decomp: &OperatorSchmidtDecomposition,
    side: Side,
    e: &[f64],
) -> Result<HermitianOperator> {
    let own = match side {
        Side::A => decomp.coords_a(),
        Side::B => decomp.coords_b(),
    };
    let full = complete_orthonormal_columns(own);
    let n = full.ncols();
    let gens = so_generators(n)?;
    if e.len() != gens.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} parameters for {} generators",
            e.len(),
            gens.len()
        )));
    }
    let mut a = DMatrix::zeros(n, n);
    for (g, &v) in gens.iter().zip(e) {
        a += g * v;
    }
    // xi_i = sum_k A_ik G_k
    let rotated = &full + &full * a.transpose();
    let rotated = rotated.columns(0, decomp.len()).into_owned();
    let mu = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(decomp.mu()));
    let m = match side {
        Side::A => &rotated * mu * decomp.coords_b().transpose(),
        Side::B => decomp.coords_a() * mu * rotated.transpose(),
    };
    Ok(crate::basis::Coordinates::from_matricized(decomp.bipartition(), &m)?.to_operator())
}

/// One Algorithm 1 step on the critical bipartition of `x`.
pub fn step_osc(
    x: &HermitianOperator,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    config: &OptimizerConfig,
) -> Result<HermitianOperator> {
    let problem = Problem::new(rho, sigma)?;
    let xc = crate::basis::Coordinates::from_operator(x).values().clone();
    let ev = problem.evaluate(&xc)?;
    let next = problem.step_osc(&xc, &ev, config.step_size)?;
    Ok(problem.coords(&next).to_operator())
}

/// One Algorithm 2 step on `side` of the critical bipartition of `x`.
pub fn step_ops(
    x: &HermitianOperator,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    side: Side,
    config: &OptimizerConfig,
) -> Result<HermitianOperator> {
    let problem = Problem::new(rho, sigma)?;
    let xc = crate::basis::Coordinates::from_operator(x).values().clone();
    let ev = problem.evaluate(&xc)?;
    let next = problem.step_ops(&xc, &ev, side, config.step_size)?;
    Ok(problem.coords(&next).to_operator())
}
