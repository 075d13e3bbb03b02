//! Named states used throughout the examples and random generators for
//! property tests.
//!
//! Ket strings are big-endian: the leftmost symbol belongs to party 0.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, CVector, HermitianOperator, PureState};

/// Identifier of a state in the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateName {
    Ghz(usize),
    W(usize),
    Dicke(usize, usize),
    H3,
    Singlet4,
    Cluster4,
    Comb,
    Upb,
    Rho3,
    Psi3(f64),
    BellPhiPlus(usize),
}

impl fmt::Display for StateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ghz(n) => write!(f, "ghz{n}"),
            Self::W(n) => write!(f, "w{n}"),
            Self::Dicke(n, k) => write!(f, "dicke{n}-{k}"),
            Self::H3 => f.write_str("h3"),
            Self::Singlet4 => f.write_str("singlet4"),
            Self::Cluster4 => f.write_str("cluster4"),
            Self::Comb => f.write_str("comb"),
            Self::Upb => f.write_str("upb"),
            Self::Rho3 => f.write_str("rho3"),
            Self::Psi3(eps) => write!(f, "psi3:eps={eps}"),
            Self::BellPhiPlus(d) => write!(f, "bell:{d}"),
        }
    }
}

impl FromStr for StateName {
    type Err = Error;

    /// Accepts `ghz3`, `w3`, `w4`, `dicke4-2`, `h3`, `singlet4`, `cluster4`,
    /// `comb`, `upb`, `rho3`, `psi3:eps=0.1`, `bell`, `bell:3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let unknown = || Error::UnknownState(s.clone());
        let count = |rest: &str| rest.parse::<usize>().map_err(|_| unknown());
        let name = match s.as_str() {
            "h3" => Self::H3,
            "singlet4" | "psi4" => Self::Singlet4,
            "cluster4" | "cl4" => Self::Cluster4,
            "comb" | "chi" => Self::Comb,
            "upb" => Self::Upb,
            "rho3" => Self::Rho3,
            "psi3" => Self::Psi3(0.1),
            "bell" => Self::BellPhiPlus(2),
            _ => {
                if let Some(rest) = s.strip_prefix("psi3:") {
                    let eps = rest.strip_prefix("eps=").unwrap_or(rest);
                    Self::Psi3(eps.parse().map_err(|_| unknown())?)
                } else if let Some(rest) = s.strip_prefix("bell:") {
                    Self::BellPhiPlus(count(rest)?)
                } else if let Some(rest) = s.strip_prefix("dicke") {
                    let (n, k) = rest.split_once('-').ok_or_else(unknown)?;
                    Self::Dicke(count(n)?, count(k)?)
                } else if let Some(rest) = s.strip_prefix("ghz") {
                    Self::Ghz(count(rest)?)
                } else if let Some(rest) = s.strip_prefix('w') {
                    Self::W(count(rest)?)
                } else {
                    return Err(unknown());
                }
            }
        };
        Ok(name)
    }
}

/// A catalog state: always a density matrix, plus the state vector when the
/// state is pure.
#[derive(Debug, Clone)]
pub struct NamedState {
    pub name: StateName,
    pub pure: Option<PureState>,
    pub density: HermitianOperator,
}

impl NamedState {
    pub fn dims(&self) -> &[usize] {
        self.density.dims()
    }

    fn from_pure(name: StateName, psi: PureState) -> Self {
        let psi = psi.with_label(name.to_string());
        Self {
            name,
            density: psi.projector(),
            pure: Some(psi),
        }
    }
}

pub fn make_state(name: StateName) -> Result<NamedState> {
    let pure = |dims: &[usize], terms: &[(&str, f64)]| -> Result<NamedState> {
        Ok(NamedState::from_pure(name, PureState::from_kets(dims, terms)?))
    };
    match name {
        StateName::Ghz(n) => {
            check_qubits(n, 2)?;
            let h = 0.5f64.sqrt();
            let (zeros, ones) = ("0".repeat(n), "1".repeat(n));
            pure(&vec![2; n], &[(&zeros, h), (&ones, h)])
        }
        StateName::W(n) => {
            check_qubits(n, 2)?;
            dicke(name, n, 1)
        }
        StateName::Dicke(n, k) => {
            check_qubits(n, 2)?;
            if k > n {
                return Err(Error::InvalidParameter(format!("Dicke state with k = {k} > n = {n}")));
            }
            dicke(name, n, k)
        }
        StateName::H3 => {
            let a = 1.0 / 8f64.sqrt();
            let terms: Vec<(String, f64)> = (0..8)
                .map(|i| (format!("{i:03b}"), if i == 7 { -a } else { a }))
                .collect();
            let terms: Vec<(&str, f64)> = terms.iter().map(|(k, a)| (k.as_str(), *a)).collect();
            pure(&[2; 3], &terms)
        }
        StateName::Singlet4 => {
            let a = 1.0 / 3f64.sqrt();
            let b = -a / 2.0;
            pure(
                &[2; 4],
                &[
                    ("0011", a),
                    ("1100", a),
                    ("0101", b),
                    ("0110", b),
                    ("1001", b),
                    ("1010", b),
                ],
            )
        }
        StateName::Cluster4 => pure(&[2; 4], &[("0000", 0.5), ("1100", 0.5), ("0011", 0.5), ("1111", -0.5)]),
        StateName::Comb => {
            let a = 1.0 / 6f64.sqrt();
            pure(
                &[2; 4],
                &[
                    ("1111", 2f64.sqrt() * a),
                    ("0001", a),
                    ("0010", a),
                    ("0100", a),
                    ("1000", a),
                ],
            )
        }
        StateName::Upb => {
            let mut data = CMatrix::identity(9, 9);
            for v in upb_vectors() {
                data -= v.projector().data();
            }
            let density = HermitianOperator::new(vec![3, 3], data.scale(0.25))?.with_label("upb");
            Ok(NamedState {
                name,
                pure: None,
                density,
            })
        }
        StateName::Rho3 => {
            let t = 1.0 / 3f64.sqrt();
            let phi = PureState::from_kets(&[4, 4], &[("00", t), ("11", t), ("22", t)])?;
            let v = PureState::from_kets(&[4, 4], &[("23", 1.0), ("32", 1.0)])?;
            let data = phi.projector().data().scale(0.5) + v.projector().data().scale(0.25);
            let density = HermitianOperator::new(vec![4, 4], data)?.with_label("rho3");
            Ok(NamedState {
                name,
                pure: None,
                density,
            })
        }
        StateName::Psi3(eps) => {
            if !(0.0..=0.5f64.sqrt()).contains(&eps) {
                return Err(Error::InvalidParameter(format!(
                    "psi3 needs 0 <= eps <= 1/sqrt(2), got {eps}"
                )));
            }
            let a = (1.0 - 2.0 * eps * eps).sqrt();
            pure(&[3, 3], &[("00", a), ("11", eps), ("22", eps)])
        }
        StateName::BellPhiPlus(d) => {
            if !(2..=10).contains(&d) {
                return Err(Error::InvalidParameter(format!(
                    "bell dimension must be in 2..=10, got {d}"
                )));
            }
            let a = 1.0 / (d as f64).sqrt();
            let kets: Vec<String> = (0..d).map(|i| format!("{i}{i}")).collect();
            let terms: Vec<(&str, f64)> = kets.iter().map(|k| (k.as_str(), a)).collect();
            pure(&[d, d], &terms)
        }
    }
}

/// Parses and builds in one step.
pub fn state_by_name(name: &str) -> Result<NamedState> {
    make_state(name.parse()?)
}

fn check_qubits(n: usize, min: usize) -> Result<()> {
    if n < min || n > 12 {
        return Err(Error::InvalidParameter(format!("party count {n} outside {min}..=12")));
    }
    Ok(())
}

fn dicke(name: StateName, n: usize, k: usize) -> Result<NamedState> {
    let kets: Vec<String> = (0u32..1 << n)
        .filter(|i| i.count_ones() as usize == k)
        .map(|i| format!("{i:0n$b}"))
        .collect();
    let a = 1.0 / (kets.len() as f64).sqrt();
    let terms: Vec<(&str, f64)> = kets.iter().map(|k| (k.as_str(), a)).collect();
    Ok(NamedState::from_pure(name, PureState::from_kets(&vec![2; n], &terms)?))
}

/// The five product vectors of the 3x3 "Tiles" unextendible product basis.
pub fn upb_vectors() -> Vec<PureState> {
    let h = 0.5f64.sqrt();
    let local = |amps: [f64; 3]| CVector::from_iterator(3, amps.iter().map(|&a| Complex64::new(a, 0.0)));
    let prod = |a: [f64; 3], b: [f64; 3]| {
        PureState::new(vec![3], local(a))
            .unwrap()
            .tensor(&PureState::new(vec![3], local(b)).unwrap())
    };
    let t = 1.0 / 3f64.sqrt();
    vec![
        prod([1.0, 0.0, 0.0], [h, -h, 0.0]),
        prod([h, -h, 0.0], [0.0, 0.0, 1.0]),
        prod([0.0, 0.0, 1.0], [0.0, h, -h]),
        prod([0.0, h, -h], [1.0, 0.0, 0.0]),
        prod([t, t, t], [t, t, t]),
    ]
}

/// Seeded generator used by every random constructor.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random pure state on the full space.
pub fn random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    let d = dims.iter().product();
    let v = CVector::from_fn(d, |_, _| gaussian_complex(rng));
    let n = v.norm();
    PureState::new(dims.to_vec(), v.unscale(n)).expect("dimensions match")
}

pub fn random_pure(dims: &[usize], seed: u64) -> PureState {
    random_pure_with(dims, &mut seeded_rng(seed))
}

/// Tensor product of independent Haar-random local pure states.
pub fn random_pure_product_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    dims.iter()
        .map(|&d| random_pure_with(&[d], rng))
        .reduce(|acc, f| acc.tensor(&f))
        .expect("at least one party")
}

pub fn random_pure_product(dims: &[usize], seed: u64) -> PureState {
    random_pure_product_with(dims, &mut seeded_rng(seed))
}

/// `G G^dagger / Tr(G G^dagger)` with a square complex Gaussian `G`.
pub fn random_density_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> HermitianOperator {
    let d = dims.iter().product();
    let g = gaussian_matrix(d, d, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    HermitianOperator::new(dims.to_vec(), w.unscale(tr)).expect("Wishart matrix is Hermitian")
}

pub fn random_density(dims: &[usize], seed: u64) -> HermitianOperator {
    random_density_with(dims, &mut seeded_rng(seed))
}

/// `(G + G^dagger) / 2` with a complex Gaussian `G`.
pub fn random_hermitian_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> HermitianOperator {
    let d = dims.iter().product();
    let g = gaussian_matrix(d, d, rng);
    HermitianOperator::new(dims.to_vec(), (&g + g.adjoint()).scale(0.5)).expect("symmetrized")
}

pub fn random_hermitian(dims: &[usize], seed: u64) -> HermitianOperator {
    random_hermitian_with(dims, &mut seeded_rng(seed))
}

/// Convex mixture of `terms` random pure product states with random weights.
pub fn random_separable_with<R: Rng + ?Sized>(dims: &[usize], terms: usize, rng: &mut R) -> HermitianOperator {
    let d: usize = dims.iter().product();
    let weights: Vec<f64> = (0..terms.max(1)).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut data = CMatrix::zeros(d, d);
    for w in weights {
        data += random_pure_product_with(dims, rng).projector().data().scale(w / total);
    }
    HermitianOperator::new(dims.to_vec(), data).expect("mixture of projectors")
}

/// A random real `n x n` matrix with standard normal entries.
pub fn random_real_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartition::Bipartition;
    use approx::assert_abs_diff_eq;

    const ALL: &[&str] = &[
        "ghz3",
        "w3",
        "w4",
        "dicke4-2",
        "h3",
        "singlet4",
        "cluster4",
        "comb",
        "upb",
        "rho3",
        "psi3:eps=0.1",
        "bell",
        "bell:3",
    ];

    #[test]
    fn catalog_states_are_normalized() {
        for name in ALL {
            let s = state_by_name(name).unwrap();
            assert_abs_diff_eq!(s.density.trace(), 1.0, epsilon = 1e-12);
            assert!(s.density.min_eigenvalue() > -1e-10, "{name}");
            if let Some(psi) = &s.pure {
                assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for name in ALL {
            let parsed: StateName = name.parse().unwrap();
            let again: StateName = parsed.to_string().parse().unwrap();
            assert_eq!(parsed, again);
        }
        assert!("nonsense".parse::<StateName>().is_err());
        assert!(make_state(StateName::Dicke(3, 4)).is_err());
    }

    #[test]
    fn w3_amplitudes() {
        let s = state_by_name("w3").unwrap();
        let amps = s.pure.unwrap().amplitudes().clone();
        for (i, a) in amps.iter().enumerate() {
            let expected = if [1, 2, 4].contains(&i) { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert_abs_diff_eq!(a.re, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn dicke_has_six_terms() {
        let s = state_by_name("dicke4-2").unwrap();
        let amps = s.pure.unwrap().amplitudes().clone();
        assert_eq!(amps.iter().filter(|a| a.norm() > 0.0).count(), 6);
    }

    #[test]
    fn hypergraph_state_after_hadamard_on_third_qubit() {
        let psi = state_by_name("h3").unwrap().pure.unwrap();
        let h = 0.5f64.sqrt();
        let had = CMatrix::from_row_slice(2, 2, &[h, h, h, -h].map(|v| Complex64::new(v, 0.0)));
        let op = CMatrix::identity(4, 4).kronecker(&had);
        let out = op * psi.amplitudes();
        for (i, a) in out.iter().enumerate() {
            let expected = if [0, 2, 4, 7].contains(&i) { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(a.re, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn upb_vectors_are_orthogonal_products() {
        let vs = upb_vectors();
        let bp = Bipartition::new(&[0], &[3, 3]).unwrap();
        for (i, a) in vs.iter().enumerate() {
            let s = a.schmidt_coefficients(&bp).unwrap();
            assert!(s[1] < 1e-12);
            for b in &vs[i + 1..] {
                assert!(a.amplitudes().dotc(b.amplitudes()).norm() < 1e-12);
            }
        }
        let upb = state_by_name("upb").unwrap().density;
        let eig = upb.eigenvalues();
        assert_eq!(eig.iter().filter(|&&e| e > 1e-10).count(), 4);
        assert!(upb.partial_transpose(&[1]).unwrap().min_eigenvalue() > -1e-10);
    }

    #[test]
    fn random_generators_are_deterministic() {
        let a = random_density(&[2, 3], 11);
        let b = random_density(&[2, 3], 11);
        assert_eq!(a.data(), b.data());
        assert!(a.is_state(1e-10));
        let p = random_pure_product(&[2, 2, 3], 5);
        let bp = Bipartition::new(&[0, 2], &[2, 2, 3]).unwrap();
        assert!(p.schmidt_coefficients(&bp).unwrap()[1] < 1e-12);
        let sep = random_separable_with(&[2, 2], 5, &mut seeded_rng(1));
        assert!(sep.is_state(1e-10));
    }
}
