//! Property checks shared by the standalone suites and the acceptance run.
//! Each returns a worst-case figure so callers can both assert and report.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use oswit::bipartition::{enumerate_bipartitions, Bipartition};
use oswit::bounds::{bipartite_bounds, gme_bounds, pure_state_oracle, GmeDimension, Measure};
use oswit::operator::{HermitianOperator, PureState};
use oswit::optimizer::{
    grad_visibility_wrt_mu, grad_visibility_wrt_rotation, optimize, rotate_schmidt_operators, OptimizerConfig, Side,
};
use oswit::osd::{osd, OperatorSchmidtDecomposition, SymmetryBreaking};
use oswit::schmidt_number::{fidelity_sn_witness, sn_witness};
use oswit::states::{
    random_density_with, random_hermitian_with, random_pure_product_with, random_pure_with, seeded_rng, state_by_name,
};
use oswit::witness::{bipartite_product, ccnr_witness, fidelity_witness, gme_witness, osd_witness, Witness};

pub const DIMS: &[&[usize]] = &[&[2, 2], &[2, 3], &[3, 3], &[2, 2, 2], &[2, 2, 3]];

/// A random bipartition of `dims`.
pub fn random_bipartition<R: Rng>(dims: &[usize], rng: &mut R) -> Bipartition {
    let all = enumerate_bipartitions(dims.len(), dims).unwrap();
    all[rng.random_range(0..all.len())].clone()
}

#[derive(Debug, Default)]
pub struct OsdReport {
    pub reconstruction: f64,
    pub orthonormality: f64,
    pub parseval: f64,
}

/// Reconstruction, Schmidt-operator orthonormality and Parseval residuals
/// over `samples` random Hermitian operators, each relative to `||X||^2`.
pub fn osd_properties(samples: usize, seed: u64) -> OsdReport {
    let mut rng = seeded_rng(seed);
    let mut out = OsdReport::default();
    for i in 0..samples {
        let dims = DIMS[i % DIMS.len()];
        let x = random_hermitian_with(dims, &mut rng);
        let bp = random_bipartition(dims, &mut rng);
        let d = osd(&x, &bp).unwrap();
        let norm2 = x.frobenius_norm().powi(2);
        let diff = x.combine(1.0, &d.reconstruct(), -1.0).unwrap();
        out.reconstruction = out.reconstruction.max(diff.frobenius_norm() / norm2.sqrt());
        out.orthonormality = out
            .orthonormality
            .max(gram_residual(d.ops_a()).max(gram_residual(d.ops_b())));
        let sum2: f64 = d.mu().iter().map(|m| m * m).sum();
        out.parseval = out.parseval.max((sum2 - norm2).abs() / norm2);
    }
    out
}

fn gram_residual(ops: &[HermitianOperator]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.hs_inner(b) - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Pure state of Schmidt rank at most `rank` across the first party.
pub fn bounded_rank_state<R: Rng>(dims: &[usize], rank: usize, rng: &mut R) -> PureState {
    let (da, db) = (dims[0], dims[1..].iter().product::<usize>());
    let mut amps = nalgebra::DVector::<Complex64>::zeros(da * db);
    for _ in 0..rank {
        let a = random_pure_with(&[da], rng);
        let b = random_pure_with(&[db], rng);
        let c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        amps += a.tensor(&b).amplitudes() * c;
    }
    PureState::new(dims.to_vec(), amps).unwrap().normalized()
}

/// A constructed witness with the sampler for the states it must accept.
pub struct WitnessCase {
    pub label: String,
    pub witness: Witness,
    pub sampler: Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> PureState>,
}

pub fn witness_cases(seed: u64) -> Vec<WitnessCase> {
    let mut rng = seeded_rng(seed);
    let mut cases = Vec::new();
    let product = |dims: Vec<usize>| -> Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> PureState> {
        Box::new(move |r| random_pure_product_with(&dims, r))
    };
    // biseparable: a product across a random bipartition, entangled inside each side
    let biseparable = |dims: Vec<usize>| -> Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> PureState> {
        Box::new(move |r| {
            let bp = random_bipartition(&dims, r);
            let a = random_pure_with(&bp.alpha_dims(), r);
            let b = random_pure_with(&bp.complement_dims(), r);
            bipartite_product(&bp, &a, &b).unwrap()
        })
    };
    for name in ["w3", "ghz3", "bell:3"] {
        let s = state_by_name(name).unwrap();
        let w = fidelity_witness(s.pure.as_ref().unwrap()).unwrap();
        let sampler = if s.dims().len() > 2 {
            biseparable(s.dims().to_vec())
        } else {
            product(s.dims().to_vec())
        };
        cases.push(WitnessCase {
            label: format!("fidelity {name}"),
            witness: w,
            sampler,
        });
    }
    for dims in [vec![2, 2], vec![2, 3], vec![3, 3]] {
        let x = random_hermitian_with(&dims, &mut rng);
        let bp = Bipartition::new(&[0], &dims).unwrap();
        cases.push(WitnessCase {
            label: format!("OSD random X {dims:?}"),
            witness: osd_witness(&x, &bp).unwrap(),
            sampler: product(dims.clone()),
        });
    }
    let upb = state_by_name("upb").unwrap().density;
    cases.push(WitnessCase {
        label: "CCNR upb".into(),
        witness: ccnr_witness(&upb, &Bipartition::new(&[0], &[3, 3]).unwrap()).unwrap(),
        sampler: product(vec![3, 3]),
    });
    for dims in [vec![2, 2, 2], vec![2, 2, 2, 2]] {
        let x = random_hermitian_with(&dims, &mut rng);
        cases.push(WitnessCase {
            label: format!("GME random X {dims:?}"),
            witness: gme_witness(&x).unwrap(),
            sampler: biseparable(dims.clone()),
        });
    }
    let w4 = state_by_name("w4").unwrap().density;
    cases.push(WitnessCase {
        label: "GME w4".into(),
        witness: gme_witness(&w4).unwrap(),
        sampler: biseparable(vec![2, 2, 2, 2]),
    });
    let bp33 = Bipartition::new(&[0], &[3, 3]).unwrap();
    let x = random_hermitian_with(&[3, 3], &mut rng);
    cases.push(WitnessCase {
        label: "SN-3 random X".into(),
        witness: sn_witness(&x, &bp33, 3).unwrap(),
        sampler: Box::new(|r| bounded_rank_state(&[3, 3], 2, r)),
    });
    let rho3 = state_by_name("rho3").unwrap().density;
    let bp44 = Bipartition::new(&[0], &[4, 4]).unwrap();
    let x3 = ccnr_witness(&rho3, &bp44).unwrap().observable().clone();
    cases.push(WitnessCase {
        label: "SN-3 rho3".into(),
        witness: sn_witness(&x3, &bp44, 3).unwrap(),
        sampler: Box::new(|r| bounded_rank_state(&[4, 4], 2, r)),
    });
    cases.push(WitnessCase {
        label: "SN-4 random X 4x4".into(),
        witness: sn_witness(&random_hermitian_with(&[4, 4], &mut rng), &bp44, 4).unwrap(),
        sampler: Box::new(|r| bounded_rank_state(&[4, 4], 3, r)),
    });
    let w3 = state_by_name("w3").unwrap().density;
    let config = OptimizerConfig {
        phase1_max_iters: 2000,
        max_iters: 1000,
        ..Default::default()
    };
    let trace = optimize(&w3, &w3, &HermitianOperator::maximally_mixed(&[2, 2, 2]), &config).unwrap();
    cases.push(WitnessCase {
        label: "optimized w3".into(),
        witness: trace.final_witness,
        sampler: biseparable(vec![2, 2, 2]),
    });
    let psi3 = state_by_name("psi3:eps=0.1").unwrap().pure.unwrap();
    cases.push(WitnessCase {
        label: "fidelity SN-3 psi3".into(),
        witness: fidelity_sn_witness(&psi3, &bp33, 3).unwrap(),
        sampler: Box::new(|r| bounded_rank_state(&[3, 3], 2, r)),
    });
    cases
}

/// Smallest `Tr(W |s><s|)` over `samples` draws per case, with its label.
pub fn min_witness_value(samples: usize, seed: u64) -> (f64, String) {
    let mut rng = seeded_rng(seed ^ 0xFFFF);
    let mut worst = (f64::INFINITY, String::new());
    for case in witness_cases(seed) {
        for _ in 0..samples {
            let s = (case.sampler)(&mut rng);
            let v = case.witness.evaluate(&s.projector()).unwrap();
            if v < worst.0 {
                worst = (v, case.label.clone());
            }
        }
    }
    worst
}

/// Target, noise and a decomposition of an observable that detects the
/// target, with symmetry broken so the decomposition is unique.
pub struct GradientCase {
    pub rho: HermitianOperator,
    pub sigma: HermitianOperator,
    pub decomp: OperatorSchmidtDecomposition,
}

pub fn gradient_cases(count: usize, seed: u64) -> Vec<GradientCase> {
    let mut rng = seeded_rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let dims = [&[2, 2][..], &[2, 3], &[3, 3]][out.len() % 3];
        let psi = random_pure_with(dims, &mut rng);
        let rho = psi
            .projector()
            .combine(0.9, &random_density_with(dims, &mut rng), 0.1)
            .unwrap();
        let sigma = HermitianOperator::maximally_mixed(dims);
        let breaking = SymmetryBreaking {
            eps: 1e-3,
            seed: rng.random(),
        };
        let x = breaking
            .apply(&random_hermitian_with(dims, &mut rng).combine(0.2, &rho, 1.0).unwrap())
            .unwrap();
        let bp = Bipartition::new(&[0], dims).unwrap();
        let decomp = osd(&x, &bp).unwrap();
        let (r, s) = (x.expectation(&rho).unwrap(), x.expectation(&sigma).unwrap());
        if r > decomp.mu1() && s < decomp.mu1() {
            out.push(GradientCase { rho, sigma, decomp });
        }
    }
    out
}

fn visibility_of(x: &HermitianOperator, offset: f64, rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    let (r, s) = (x.expectation(rho).unwrap(), x.expectation(sigma).unwrap());
    (offset - s) / (r - s)
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / scale.max(1e-300)
}

/// Relative error of the coefficient gradient against central differences
/// of `p(mu) = (mu_1 - S) / (R - S)` on the rebuilt operator.
pub fn mu_gradient_error(case: &GradientCase, h: f64) -> f64 {
    let mu = case.decomp.mu().to_vec();
    let analytic = grad_visibility_wrt_mu(&case.decomp, &case.rho, &case.sigma).unwrap();
    let p = |w: &[f64]| {
        let x = case.decomp.recombine(w).unwrap();
        visibility_of(&x, w[0], &case.rho, &case.sigma)
    };
    let numeric: Vec<f64> = (0..mu.len())
        .map(|j| {
            let (mut up, mut down) = (mu.clone(), mu.clone());
            up[j] += h;
            down[j] -= h;
            (p(&up) - p(&down)) / (2.0 * h)
        })
        .collect();
    relative_error(&analytic, &numeric)
}

/// Relative error of the rotation gradient against central differences
/// through explicit rotations of the Schmidt operators, offset held fixed.
pub fn rotation_gradient_error(case: &GradientCase, side: Side, h: f64) -> f64 {
    let analytic = grad_visibility_wrt_rotation(&case.decomp, &case.rho, &case.sigma, side).unwrap();
    let offset = case.decomp.mu1();
    let p = |e: &[f64]| {
        let x = rotate_schmidt_operators(&case.decomp, side, e).unwrap();
        visibility_of(&x, offset, &case.rho, &case.sigma)
    };
    let n = analytic.len();
    let numeric: Vec<f64> = (0..n)
        .map(|l| {
            let mut e = vec![0.0; n];
            e[l] = h;
            let up = p(&e);
            e[l] = -h;
            (up - p(&e)) / (2.0 * h)
        })
        .collect();
    relative_error(&analytic, &numeric)
}

/// Smallest `(sum_i s_i)^2 - <psi|X|psi> / mu_1` over random pairs.
pub fn schmidt_vector_margin(samples: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut worst = f64::INFINITY;
    for i in 0..samples {
        let dims = DIMS[i % DIMS.len()];
        let bp = random_bipartition(dims, &mut rng);
        let psi = random_pure_with(dims, &mut rng);
        // random observables, and projectors on or near psi where the bound is tight
        let x = match i % 3 {
            0 => random_hermitian_with(dims, &mut rng),
            1 => psi.projector(),
            _ => psi
                .projector()
                .combine(1.0, &random_hermitian_with(dims, &mut rng), 0.05)
                .unwrap(),
        };
        let mu1 = osd(&x, &bp).unwrap().mu1();
        let s: f64 = psi.schmidt_coefficients(&bp).unwrap().iter().sum();
        worst = worst.min(s * s - psi.expectation(&x).unwrap() / mu1);
    }
    worst
}

/// Largest excess of any bound over the pure-state value, bipartite bounds
/// over `bipartite` random states and GME concurrence over `gme` three-qubit
/// states, each with `X = |psi><psi|`. Also returns the largest gap
/// between the rank-one bounds and the fidelity form `S = |<phi|psi>|^2 / s_1^2`.
pub fn bound_soundness(bipartite: usize, gme: usize, seed: u64) -> (f64, f64) {
    let mut rng = seeded_rng(seed);
    let mut excess = f64::NEG_INFINITY;
    let mut reduction: f64 = 0.0;
    for i in 0..bipartite {
        let dims = [&[2, 2][..], &[2, 3], &[3, 3], &[3, 4]][i % 4];
        let bp = Bipartition::new(&[0], dims).unwrap();
        let psi = random_pure_with(dims, &mut rng);
        let rho = psi.projector();
        let report = bipartite_bounds(&rho, &rho, &bp).unwrap();
        for m in Measure::ALL {
            excess = excess.max(report.bound(m) - pure_state_oracle(&psi, &bp, m).unwrap());
        }
        // rank-one observable: offset is the largest squared Schmidt coefficient
        let phi = random_pure_with(dims, &mut rng);
        let s1 = phi.schmidt_coefficients(&bp).unwrap()[0];
        let fidelity = phi.expectation(&rho).unwrap();
        let by_fidelity = (fidelity / (s1 * s1)).max(1.0);
        let report = bipartite_bounds(&rho, &phi.projector(), &bp).unwrap();
        reduction = reduction.max((report.s - by_fidelity).abs());
    }
    for _ in 0..gme {
        let psi = random_pure_with(&[2, 2, 2], &mut rng);
        let rho = psi.projector();
        let bound = gme_bounds(&rho, &rho, GmeDimension::PerBipartition)
            .unwrap()
            .bound(Measure::Concurrence);
        let oracle = enumerate_bipartitions(3, &[2, 2, 2])
            .unwrap()
            .iter()
            .map(|bp| pure_state_oracle(&psi, bp, Measure::Concurrence).unwrap())
            .fold(f64::INFINITY, f64::min);
        excess = excess.max(bound - oracle);
    }
    (excess, reduction)
}
