//! Witnesses of the form `W = offset * 1 - X`.
//!
//! The offset is the largest value `Tr(X rho)` can take on a product state,
//! which for an observable with operator Schmidt decomposition across one
//! bipartition is its leading coefficient `mu_1`. For genuine multipartite
//! entanglement the offset is the maximum over all bipartitions.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::Coordinates;
use crate::bipartition::{enumerate_bipartitions, Bipartition};
use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, MatrixFile, PureState, NORMALIZATION_TOL};
use crate::osd::{leading_singular_value, osd};

/// Offsets tied within this margin resolve to the lowest bipartition index.
pub const TIE_TOL: f64 = 1e-12;

/// Tolerance on `Tr(W sigma) >= 0` before the noise counts as detected.
pub const NOISE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    Fidelity,
    Osd,
    SchmidtNumber(usize),
    Gme,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fidelity => f.write_str("Fidelity"),
            Self::Osd => f.write_str("OSD"),
            Self::SchmidtNumber(k) => write!(f, "SchmidtNumber({k})"),
            Self::Gme => f.write_str("GME"),
        }
    }
}

impl std::str::FromStr for WitnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Fidelity" => Ok(Self::Fidelity),
            "OSD" => Ok(Self::Osd),
            "GME" => Ok(Self::Gme),
            _ => s
                .strip_prefix("SchmidtNumber(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .map(Self::SchmidtNumber)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown witness kind {s:?}"))),
        }
    }
}

/// Per-bipartition leading coefficients and the bipartition attaining the
/// maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct GmeCertificate {
    pub per_bipartition: Vec<(Bipartition, f64)>,
    pub critical: usize,
}

impl GmeCertificate {
    fn from_values(per_bipartition: Vec<(Bipartition, f64)>) -> Self {
        let critical = argmax_with_ties(per_bipartition.iter().map(|(_, v)| *v));
        Self {
            per_bipartition,
            critical,
        }
    }

    pub fn critical_bipartition(&self) -> &Bipartition {
        &self.per_bipartition[self.critical].0
    }

    pub fn max_value(&self) -> f64 {
        self.per_bipartition[self.critical].1
    }
}

/// Index of the maximum; a later value must exceed the current best by more
/// than [`TIE_TOL`] to win.
pub(crate) fn argmax_with_ties(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 + TIE_TOL {
            best = (i, v);
        }
    }
    best.0
}

#[derive(Debug, Clone)]
pub struct Witness {
    offset: f64,
    observable: HermitianOperator,
    kind: WitnessKind,
    certificate: Option<GmeCertificate>,
    heuristic: bool,
}

impl Witness {
    /// Assembles a witness from parts. The caller vouches that `offset`
    /// bounds `Tr(X rho)` on the relevant product states.
    pub fn from_parts(
        offset: f64,
        observable: HermitianOperator,
        kind: WitnessKind,
        certificate: Option<GmeCertificate>,
    ) -> Self {
        Self {
            offset,
            observable,
            kind,
            certificate,
            heuristic: false,
        }
    }

    pub(crate) fn mark_heuristic(mut self) -> Self {
        self.heuristic = true;
        self
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn observable(&self) -> &HermitianOperator {
        &self.observable
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn certificate(&self) -> Option<&GmeCertificate> {
        self.certificate.as_ref()
    }

    /// Set when the offset came from a numerical lower bound and the witness
    /// cannot back a certification claim.
    pub fn is_heuristic(&self) -> bool {
        self.heuristic
    }

    pub fn dims(&self) -> &[usize] {
        self.observable.dims()
    }

    /// The matrix `offset * 1 - X`.
    pub fn operator(&self) -> HermitianOperator {
        HermitianOperator::identity(self.dims())
            .combine(self.offset, &self.observable, -1.0)
            .expect("same dimensions")
    }

    /// `offset * Tr(rho) - Tr(X rho)`.
    pub fn evaluate(&self, rho: &HermitianOperator) -> Result<f64> {
        evaluate(self, rho)
    }

    pub fn visibility(&self, rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Visibility> {
        visibility(self, rho, sigma)
    }

    /// `c * W` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            offset: self.offset * c,
            observable: self.observable.scaled(c),
            ..self.clone()
        }
    }

    pub fn to_file(&self) -> WitnessFile {
        WitnessFile {
            kind: self.kind.to_string(),
            offset: self.offset,
            heuristic: self.heuristic,
            observable: self.observable.to_json(),
            certificate: self.certificate.as_ref().map(|c| CertificateFile {
                per_bipartition_mu1: c.per_bipartition.iter().map(|(b, v)| (b.to_string(), *v)).collect(),
                critical: c.critical_bipartition().alpha().to_vec(),
            }),
        }
    }

    pub fn from_file(file: &WitnessFile) -> Result<Self> {
        let observable = HermitianOperator::from_json(&file.observable)?;
        let dims = observable.dims().to_vec();
        let certificate = file
            .certificate
            .as_ref()
            .map(|c| -> Result<GmeCertificate> {
                let mut per = c
                    .per_bipartition_mu1
                    .iter()
                    .map(|(label, v)| Ok((Bipartition::parse(label, &dims)?, *v)))
                    .collect::<Result<Vec<_>>>()?;
                // restore enumeration order
                per.sort_by(|(a, _), (b, _)| (a.alpha().len(), a.alpha()).cmp(&(b.alpha().len(), b.alpha())));
                let critical = per
                    .iter()
                    .position(|(b, _)| b.alpha() == c.critical.as_slice())
                    .ok_or_else(|| Error::InvalidParameter("critical bipartition not listed".into()))?;
                Ok(GmeCertificate {
                    per_bipartition: per,
                    critical,
                })
            })
            .transpose()?;
        Ok(Self {
            offset: file.offset,
            observable,
            kind: file.kind.parse()?,
            certificate,
            heuristic: file.heuristic,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(&serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// JSON layout of an exported witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFile {
    pub kind: String,
    pub offset: f64,
    #[serde(default)]
    pub heuristic: bool,
    pub observable: MatrixFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub per_bipartition_mu1: BTreeMap<String, f64>,
    pub critical: Vec<usize>,
}

/// Required visibility of a target state on a noise line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Visibility {
    Critical(f64),
    /// `Tr(W rho) >= 0`: no mixture with the noise is detected.
    NotDetecting,
}

impl Visibility {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Critical(p) => Some(p),
            Self::NotDetecting => None,
        }
    }

    /// Value used for ranking, with `NotDetecting` as `+inf`.
    pub fn rank(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn is_detecting(self) -> bool {
        matches!(self, Self::Critical(_))
    }
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Critical(p) => write!(f, "{p:.6}"),
            Self::NotDetecting => f.write_str("not detecting"),
        }
    }
}

pub fn evaluate(w: &Witness, rho: &HermitianOperator) -> Result<f64> {
    let x = w.observable.expectation(rho)?;
    Ok(w.offset * rho.trace() - x)
}

/// `p = Tr(W sigma) / (Tr(W sigma) - Tr(W rho))`, the smallest weight `p` for
/// which `p rho + (1 - p) sigma` is still detected.
pub fn visibility(w: &Witness, rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<Visibility> {
    let ws = evaluate(w, sigma)?;
    let wr = evaluate(w, rho)?;
    visibility_from_values(wr, ws)
}

pub(crate) fn visibility_from_values(w_rho: f64, w_sigma: f64) -> Result<Visibility> {
    if w_sigma < -NOISE_TOL {
        return Err(Error::NoiseDetected(w_sigma));
    }
    if w_rho >= 0.0 {
        return Ok(Visibility::NotDetecting);
    }
    Ok(Visibility::Critical(w_sigma / (w_sigma - w_rho)))
}

/// Leading operator Schmidt coefficient of `x` across every canonical
/// bipartition.
pub fn leading_coefficients(x: &HermitianOperator) -> Result<Vec<(Bipartition, f64)>> {
    let coords = Coordinates::from_operator(x);
    enumerate_bipartitions(x.n_parties(), x.dims())?
        .into_iter()
        .map(|bp| {
            let mu1 = leading_singular_value(&coords.matricize(&bp)?)?;
            Ok((bp, mu1))
        })
        .collect()
}

/// `s_1^2 * 1 - |psi><psi|` with `s_1^2` the largest squared Schmidt
/// coefficient over all bipartitions.
pub fn fidelity_witness(psi: &PureState) -> Result<Witness> {
    psi.ensure_normalized()?;
    let per = enumerate_bipartitions(psi.n_parties(), psi.dims())?
        .into_iter()
        .map(|bp| {
            let s1 = psi.schmidt_coefficients(&bp)?[0];
            Ok((bp, s1 * s1))
        })
        .collect::<Result<Vec<_>>>()?;
    let cert = GmeCertificate::from_values(per);
    let offset = cert.max_value();
    let certificate = (psi.n_parties() > 2).then_some(cert);
    Ok(Witness::from_parts(
        offset,
        psi.projector(),
        WitnessKind::Fidelity,
        certificate,
    ))
}

/// `mu_1 * 1 - X` across `bp`.
pub fn osd_witness(x: &HermitianOperator, bp: &Bipartition) -> Result<Witness> {
    let d = osd(x, bp)?;
    Ok(Witness::from_parts(d.mu1(), x.clone(), WitnessKind::Osd, None))
}

/// Sum of operator Schmidt coefficients of a state; above one certifies
/// entanglement.
pub fn ccnr_value(rho: &HermitianOperator, bp: &Bipartition) -> Result<f64> {
    rho.ensure_state(NORMALIZATION_TOL)?;
    Ok(osd(rho, bp)?.coefficient_sum())
}

/// The OSD witness built from the Schmidt operators of `rho` with every
/// nonzero coefficient replaced by one. Its offset is recomputed, not
/// assumed.
pub fn ccnr_witness(rho: &HermitianOperator, bp: &Bipartition) -> Result<Witness> {
    rho.ensure_state(NORMALIZATION_TOL)?;
    let d = osd(rho, bp)?;
    let rank = d.effective_rank();
    let weights: Vec<f64> = (0..d.len()).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    let x = d.recombine(&weights)?.with_label("ccnr");
    osd_witness(&x, bp)
}

/// `mu * 1 - X` with `mu` the largest leading coefficient over all
/// bipartitions. Two-party input gives the plain OSD witness.
pub fn gme_witness(x: &HermitianOperator) -> Result<Witness> {
    if x.n_parties() < 3 {
        let bp = Bipartition::new(&[0], x.dims())?;
        return osd_witness(x, &bp);
    }
    let cert = GmeCertificate::from_values(leading_coefficients(x)?);
    Ok(Witness::from_parts(
        cert.max_value(),
        x.clone(),
        WitnessKind::Gme,
        Some(cert),
    ))
}

/// Places `a` on the alpha side and `b` on the complement of `bp`.
pub fn bipartite_product(bp: &Bipartition, a: &PureState, b: &PureState) -> Result<PureState> {
    if a.dims() != bp.alpha_dims().as_slice() || b.dims() != bp.complement_dims().as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "factors over {:?} and {:?} for bipartition {bp}",
            a.dims(),
            b.dims()
        )));
    }
    let joint = a.tensor(b);
    let perm = bp.index_permutation();
    let mut amps = joint.amplitudes().clone();
    for (new, &old) in perm.iter().enumerate() {
        amps[old] = joint.amplitudes()[new];
    }
    PureState::new(bp.dims().to_vec(), amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_pure_with, seeded_rng, state_by_name};
    use approx::assert_abs_diff_eq;

    fn pure(name: &str) -> PureState {
        state_by_name(name).unwrap().pure.unwrap()
    }

    #[test]
    fn fidelity_offsets() {
        assert_abs_diff_eq!(fidelity_witness(&pure("ghz3")).unwrap().offset(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            fidelity_witness(&pure("w3")).unwrap().offset(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
        let zero = PureState::from_kets(&[2, 2], &[("00", 1.0)]).unwrap();
        let w = fidelity_witness(&zero).unwrap();
        assert_abs_diff_eq!(w.offset(), 1.0, epsilon = 1e-12);
        assert!(w.operator().min_eigenvalue() > -1e-12);
        let unnormalized = PureState::from_kets(&[2, 2], &[("00", 1.1)]).unwrap();
        assert!(fidelity_witness(&unnormalized).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let w3 = pure("w3");
        let w = fidelity_witness(&w3).unwrap();
        assert_abs_diff_eq!(w.evaluate(&w3.projector()).unwrap(), -1.0 / 3.0, epsilon = 1e-12);
        let ghz = fidelity_witness(&pure("ghz3")).unwrap();
        let white = HermitianOperator::maximally_mixed(&[2, 2, 2]);
        assert_abs_diff_eq!(ghz.evaluate(&white).unwrap(), 3.0 / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn visibility_examples() {
        let white = HermitianOperator::maximally_mixed(&[2, 2, 2]);
        let w3 = pure("w3");
        let p = fidelity_witness(&w3)
            .unwrap()
            .visibility(&w3.projector(), &white)
            .unwrap();
        assert_abs_diff_eq!(p.value().unwrap(), 13.0 / 21.0, epsilon = 1e-12);
        let ghz = pure("ghz3");
        let p = fidelity_witness(&ghz)
            .unwrap()
            .visibility(&ghz.projector(), &white)
            .unwrap();
        assert_abs_diff_eq!(p.value().unwrap(), 3.0 / 7.0, epsilon = 1e-12);
        let p = fidelity_witness(&ghz).unwrap().visibility(&white, &white).unwrap();
        assert_eq!(p, Visibility::NotDetecting);
        assert_eq!(p.rank(), f64::INFINITY);
    }

    #[test]
    fn detected_noise_is_an_error() {
        let ghz = pure("ghz3");
        let w = fidelity_witness(&ghz).unwrap();
        assert!(matches!(
            w.visibility(&ghz.projector(), &ghz.projector()),
            Err(Error::NoiseDetected(_))
        ));
    }

    #[test]
    fn ccnr_examples() {
        let bp = Bipartition::new(&[0], &[2, 2]).unwrap();
        let bell = state_by_name("bell").unwrap().density;
        assert_abs_diff_eq!(ccnr_value(&bell, &bp).unwrap(), 2.0, epsilon = 1e-12);
        let white = HermitianOperator::maximally_mixed(&[2, 2]);
        assert_abs_diff_eq!(ccnr_value(&white, &bp).unwrap(), 0.5, epsilon = 1e-12);
        let w = ccnr_witness(&bell, &bp).unwrap();
        assert_abs_diff_eq!(w.offset(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.evaluate(&bell).unwrap(), -1.0, epsilon = 1e-12);
        assert!(ccnr_value(&HermitianOperator::identity(&[2, 2]), &bp).is_err());
    }

    #[test]
    fn gme_offsets_and_ties() {
        let w = gme_witness(&pure("w3").projector()).unwrap();
        assert_abs_diff_eq!(w.offset(), 2.0 / 3.0, epsilon = 1e-12);
        let cert = w.certificate().unwrap();
        assert_eq!(cert.per_bipartition.len(), 3);
        assert_eq!(cert.critical, 0);
        let g = gme_witness(&pure("ghz3").projector()).unwrap();
        assert_abs_diff_eq!(g.offset(), 0.5, epsilon = 1e-12);
        let prod = PureState::from_kets(&[2, 2, 2], &[("000", 1.0)]).unwrap();
        let p = gme_witness(&prod.projector()).unwrap();
        assert_abs_diff_eq!(p.offset(), 1.0, epsilon = 1e-12);
        assert!(p.operator().min_eigenvalue() > -1e-12);
    }

    #[test]
    fn witness_json_round_trip() {
        let w = gme_witness(&pure("w3").projector()).unwrap();
        let text = serde_json::to_string(&w.to_file()).unwrap();
        let back = Witness::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.kind(), WitnessKind::Gme);
        assert_abs_diff_eq!(back.offset(), w.offset(), epsilon = 0.0);
        assert_eq!(back.certificate(), w.certificate());
        assert_eq!(
            "SchmidtNumber(3)".parse::<WitnessKind>().unwrap(),
            WitnessKind::SchmidtNumber(3)
        );
    }

    #[test]
    fn bipartite_product_places_factors() {
        let bp = Bipartition::new(&[1], &[2, 3, 2]).unwrap();
        let mut rng = seeded_rng(3);
        let a = random_pure_with(&[3], &mut rng);
        let b = random_pure_with(&[2, 2], &mut rng);
        let psi = bipartite_product(&bp, &a, &b).unwrap();
        let s = psi.schmidt_coefficients(&bp).unwrap();
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-12);
        // middle party carries `a`
        let rho_mid = crate::operator::partial_trace(&psi.projector(), &[1]).unwrap();
        assert!((rho_mid.data() - a.projector().data()).norm() < 1e-12);
    }
}
