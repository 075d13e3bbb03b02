//! Lower bounds on convex-roof entanglement measures from a witness
//! observable, and the exact pure-state values they are checked against.
//!
//! Everything is a function of `S = max{Tr(rho X) / offset, 1}` and a
//! dimension parameter `m`. At `S = 1` every bound sits at the zero point of
//! its measure.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bipartition::{enumerate_bipartitions, Bipartition};
use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, PureState};
use crate::osd::osd;
use crate::witness::gme_witness;

/// `m - S` below this fraction of `m` counts as zero.
const GAP_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "CREN")]
    Cren,
    Concurrence,
    #[serde(rename = "GConcurrence")]
    GConcurrence,
    GeometricMeasure,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Cren,
        Measure::Concurrence,
        Measure::GConcurrence,
        Measure::GeometricMeasure,
    ];
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Cren => "CREN",
            Measure::Concurrence => "Concurrence",
            Measure::GConcurrence => "GConcurrence",
            Measure::GeometricMeasure => "GeometricMeasure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundContext {
    Bipartite,
    #[serde(rename = "GME")]
    Gme,
}

/// How `m` is chosen for genuine multipartite bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GmeDimension {
    /// Largest over bipartitions of the smaller side dimension. This is the
    /// quantity the bounds are proven for.
    #[default]
    PerBipartition,
    /// Largest single-party dimension.
    LargestParty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureBoundReport {
    #[serde(rename = "S")]
    pub s: f64,
    pub m: usize,
    pub context: BoundContext,
    pub bounds: BTreeMap<Measure, f64>,
}

impl MeasureBoundReport {
    pub fn from_s(s: f64, m: usize, context: BoundContext) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension parameter m must be >= 2, got {m}"
            )));
        }
        if !(s >= 1.0) {
            return Err(Error::InvalidParameter(format!("S must be >= 1, got {s}")));
        }
        let mf = m as f64;
        // S never exceeds m; rounding near S = m is amplified by the root
        let gap = if mf - s < GAP_SNAP * mf { 0.0 } else { mf - s };
        let bounds = BTreeMap::from([
            (Measure::Cren, 0.5 * (s - 1.0)),
            (Measure::Concurrence, (2.0 / (mf * (mf - 1.0))).sqrt() * (s - 1.0)),
            (Measure::GConcurrence, s + 1.0 - mf),
            (
                Measure::GeometricMeasure,
                1.0 - (s.sqrt() + ((mf - 1.0) * gap).sqrt()).powi(2) / (mf * mf),
            ),
        ]);
        Ok(Self { s, m, context, bounds })
    }

    pub fn bound(&self, measure: Measure) -> f64 {
        self.bounds[&measure]
    }
}

/// `max{Tr(rho X) / offset, 1}`.
pub fn s_value(rho: &HermitianOperator, x: &HermitianOperator, offset: f64) -> Result<f64> {
    if !(offset > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "offset must be positive, got {offset}"
        )));
    }
    Ok((x.expectation(rho)? / offset).max(1.0))
}

/// Bounds across one bipartition, with the leading operator Schmidt
/// coefficient of `x` as offset and `m` the smaller side dimension.
pub fn bipartite_bounds(
    rho: &HermitianOperator,
    x: &HermitianOperator,
    bp: &Bipartition,
) -> Result<MeasureBoundReport> {
    rho.ensure_state(1e-9)?;
    let mu1 = osd(x, bp)?.mu1();
    MeasureBoundReport::from_s(s_value(rho, x, mu1)?, bp.min_side_dim(), BoundContext::Bipartite)
}

/// Genuine multipartite bounds with the GME witness offset of `x`.
pub fn gme_bounds(
    rho: &HermitianOperator,
    x: &HermitianOperator,
    dimension: GmeDimension,
) -> Result<MeasureBoundReport> {
    if x.n_parties() < 3 {
        return Err(Error::InvalidParties(format!(
            "GME bounds need at least 3 parties, got {}",
            x.n_parties()
        )));
    }
    rho.ensure_state(1e-9)?;
    let offset = gme_witness(x)?.offset();
    let dims = x.dims();
    let m = match dimension {
        GmeDimension::PerBipartition => enumerate_bipartitions(dims.len(), dims)?
            .iter()
            .map(Bipartition::min_side_dim)
            .max()
            .expect("at least one bipartition"),
        GmeDimension::LargestParty => *dims.iter().max().expect("nonempty dims"),
    };
    MeasureBoundReport::from_s(s_value(rho, x, offset)?, m, BoundContext::Gme)
}

/// Exact value of `measure` on a pure state across `bp`, from its Schmidt
/// vector padded to the smaller side dimension.
pub fn pure_state_oracle(psi: &PureState, bp: &Bipartition, measure: Measure) -> Result<f64> {
    psi.ensure_normalized()?;
    let mut s = psi.schmidt_coefficients(bp)?;
    let m = bp.min_side_dim();
    s.resize(m, 0.0);
    let purity: f64 = s.iter().map(|x| x.powi(4)).sum();
    Ok(match measure {
        Measure::Cren => 0.5 * (s.iter().sum::<f64>().powi(2) - 1.0),
        Measure::Concurrence => (2.0 * (1.0 - purity)).max(0.0).sqrt(),
        Measure::GConcurrence => m as f64 * s.iter().map(|x| x * x).product::<f64>().powf(1.0 / m as f64),
        Measure::GeometricMeasure => 1.0 - s[0] * s[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_state, state_by_name, StateName};
    use approx::assert_abs_diff_eq;

    #[test]
    fn s_values() {
        let phi = make_state(StateName::BellPhiPlus(2)).unwrap().density;
        assert_abs_diff_eq!(s_value(&phi, &phi, 0.5).unwrap(), 2.0, epsilon = 1e-12);
        let phi3 = make_state(StateName::BellPhiPlus(3)).unwrap().density;
        assert_abs_diff_eq!(s_value(&phi3, &phi3, 1.0 / 3.0).unwrap(), 3.0, epsilon = 1e-12);
        let mixed = HermitianOperator::maximally_mixed(&[2, 2]);
        assert_eq!(s_value(&mixed, &phi, 0.5).unwrap(), 1.0);
        assert!(s_value(&phi, &phi, 0.0).is_err());
    }

    #[test]
    fn bell_bounds_are_tight_for_concurrence() {
        let phi = make_state(StateName::BellPhiPlus(2)).unwrap();
        let bp = Bipartition::new(&[0], &[2, 2]).unwrap();
        let r = bipartite_bounds(&phi.density, &phi.density, &bp).unwrap();
        assert_eq!(r.m, 2);
        assert_abs_diff_eq!(r.s, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound(Measure::Concurrence), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound(Measure::Cren), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound(Measure::GConcurrence), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound(Measure::GeometricMeasure), 0.5, epsilon = 1e-12);
        let psi = phi.pure.unwrap();
        assert_abs_diff_eq!(
            pure_state_oracle(&psi, &bp, Measure::Concurrence).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_points_at_s_one() {
        let r = MeasureBoundReport::from_s(1.0, 3, BoundContext::Bipartite).unwrap();
        assert_eq!(r.bound(Measure::Cren), 0.0);
        assert_eq!(r.bound(Measure::Concurrence), 0.0);
        assert_eq!(r.bound(Measure::GConcurrence), -1.0);
        assert_abs_diff_eq!(r.bound(Measure::GeometricMeasure), 0.0, epsilon = 1e-15);
        let x = state_by_name("ghz3").unwrap().density;
        let r = gme_bounds(
            &HermitianOperator::maximally_mixed(&[2, 2, 2]),
            &x,
            GmeDimension::default(),
        )
        .unwrap();
        assert_eq!(r.s, 1.0);
        assert_eq!(r.bound(Measure::Concurrence), 0.0);
    }

    #[test]
    fn gme_examples() {
        let ghz = state_by_name("ghz3").unwrap().density;
        let r = gme_bounds(&ghz, &ghz, GmeDimension::PerBipartition).unwrap();
        assert_abs_diff_eq!(r.s, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound(Measure::Concurrence), 1.0, epsilon = 1e-12);
        let w = state_by_name("w3").unwrap();
        let r = gme_bounds(&w.density, &w.density, GmeDimension::PerBipartition).unwrap();
        assert_abs_diff_eq!(r.s, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound(Measure::Concurrence), 0.5, epsilon = 1e-12);
        let psi = w.pure.unwrap();
        let oracle = enumerate_bipartitions(3, &[2, 2, 2])
            .unwrap()
            .iter()
            .map(|bp| pure_state_oracle(&psi, bp, Measure::Concurrence).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(oracle, (8.0f64 / 9.0).sqrt(), epsilon = 1e-12);
        assert!(r.bound(Measure::Concurrence) <= oracle);
        assert!(gme_bounds(&ghz, &ghz, GmeDimension::LargestParty).unwrap().m == 2);
    }

    #[test]
    fn pure_oracles() {
        let bp = Bipartition::new(&[0], &[2, 2]).unwrap();
        let psi = PureState::from_kets(&[2, 2], &[("00", 0.8f64.sqrt()), ("11", 0.2f64.sqrt())]).unwrap();
        assert_abs_diff_eq!(
            pure_state_oracle(&psi, &bp, Measure::Concurrence).unwrap(),
            0.8,
            epsilon = 1e-12
        );
        let product = PureState::from_kets(&[2, 2], &[("01", 1.0)]).unwrap();
        for m in Measure::ALL {
            assert_abs_diff_eq!(pure_state_oracle(&product, &bp, m).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn report_json_keys() {
        let r = MeasureBoundReport::from_s(2.0, 2, BoundContext::Gme).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["S"], 2.0);
        assert_eq!(v["context"], "GME");
        assert!(v["bounds"]["CREN"].is_number() && v["bounds"]["GeometricMeasure"].is_number());
    }
}
