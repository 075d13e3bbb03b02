//! Gradient descent on the required visibility of OSD witnesses.
//!
//! Two update rules act on the decomposition `X = sum_i mu_i G_i^A (x) G_i^B`
//! across the critical bipartition (the one with the largest leading
//! coefficient): Algorithm 1 moves the coefficients `mu`, Algorithm 2 rotates
//! the Schmidt operators of one side. After every update the witness offset
//! is recomputed from scratch over all bipartitions, so every iterate is a
//! valid witness.

mod engine;
mod gradients;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::Coordinates;
use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::states::random_density;
use crate::witness::{gme_witness, visibility, Visibility, Witness};

pub use engine::{Side, REORTHONORMALIZE_TOL};
pub use gradients::{
    grad_visibility_wrt_mu, grad_visibility_wrt_rotation, rotate_schmidt_operators, so_generators, step_ops, step_osc,
};

use engine::{Evaluation, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    OscOnly,
    OpsOnly,
    /// Algorithm 1, then Algorithm 2 on side A, then on side B.
    Alternating,
    /// Algorithm 1 until it plateaus, then `Alternating`.
    TwoPhase,
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "osc-only" | "osc" => Ok(Self::OscOnly),
            "ops-only" | "ops" => Ok(Self::OpsOnly),
            "alternating" => Ok(Self::Alternating),
            "two-phase" | "twophase" => Ok(Self::TwoPhase),
            other => Err(Error::InvalidParameter(format!("unknown schedule {other:?}"))),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::OscOnly => "osc-only",
            Self::OpsOnly => "ops-only",
            Self::Alternating => "alternating",
            Self::TwoPhase => "two-phase",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub step_size: f64,
    /// Iteration budget; for `TwoPhase` it covers the alternating phase.
    pub max_iters: usize,
    /// Iteration budget of the first `TwoPhase` phase.
    pub phase1_max_iters: usize,
    /// Plateau test: relative change of the mean `p_crit` between two
    /// consecutive windows.
    pub convergence_tol: f64,
    pub convergence_window: usize,
    /// Weight of the random density matrix mixed into target, noise and
    /// start operator.
    pub perturbation_eps: f64,
    pub seed: u64,
    pub schedule: Schedule,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step_size: 1e-3,
            max_iters: 100_000,
            phase1_max_iters: 20_000,
            convergence_tol: 1e-8,
            convergence_window: 100,
            perturbation_eps: 1e-4,
            seed: 0x5EED,
            schedule: Schedule::TwoPhase,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(0.0..1.0).contains(&self.perturbation_eps) {
            return Err(Error::InvalidParameter(format!(
                "perturbation weight must lie in [0, 1), got {}",
                self.perturbation_eps
            )));
        }
        if self.convergence_window == 0 {
            return Err(Error::InvalidParameter("convergence window must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let config: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    Osc,
    Ops,
    Alternating,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Initial => "initial",
            Self::Osc => "osc",
            Self::Ops => "ops",
            Self::Alternating => "alternating",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub index: usize,
    pub p_crit: Visibility,
    pub mu1: f64,
    pub step_kind: StepKind,
    pub critical_bipartition: String,
}

#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    pub iterations: Vec<TraceRow>,
    /// Best witness encountered, offset recomputed from scratch.
    pub final_witness: Witness,
    /// Required visibility of the best witness on the perturbed inputs the
    /// optimizer saw.
    pub best_visibility: Visibility,
    /// Required visibility of the best witness on the inputs as given.
    pub final_visibility: Visibility,
    pub initial_visibility: Visibility,
    /// Iteration at which the alternating phase began (`TwoPhase` only).
    pub phase2_start: Option<usize>,
    pub converged: bool,
}

impl OptimizationTrace {
    pub fn initial(&self) -> Visibility {
        self.initial_visibility
    }

    /// Iteration index of the best iterate.
    pub fn best_index(&self) -> usize {
        self.iterations
            .iter()
            .min_by(|a, b| a.p_crit.rank().total_cmp(&b.p_crit.rank()).then(a.index.cmp(&b.index)))
            .map_or(0, |r| r.index)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "p_crit", "mu1", "step_kind", "critical_bipartition"])?;
        for row in &self.iterations {
            let p = row
                .p_crit
                .value()
                .map_or_else(|| "inf".to_string(), |p| format!("{p:.12}"));
            w.write_record([
                row.index.to_string(),
                p,
                format!("{:.12}", row.mu1),
                row.step_kind.to_string(),
                row.critical_bipartition.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Optimizes a two-party witness.
pub fn optimize_bipartite(
    x0: &HermitianOperator,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    if rho.n_parties() != 2 {
        return Err(Error::InvalidParties(format!(
            "bipartite optimization needs two parties, got {}",
            rho.n_parties()
        )));
    }
    run(x0, rho, sigma, config)
}

/// Optimizes a genuine multipartite witness on the critical bipartition.
pub fn optimize_multipartite(
    x0: &HermitianOperator,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    if rho.n_parties() < 3 {
        return Err(Error::InvalidParties(format!(
            "multipartite optimization needs at least three parties, got {}",
            rho.n_parties()
        )));
    }
    run(x0, rho, sigma, config)
}

/// Dispatches on the party count.
pub fn optimize(
    x0: &HermitianOperator,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    run(x0, rho, sigma, config)
}

fn perturbed(x: &HermitianOperator, noise: &HermitianOperator, eps: f64) -> Result<HermitianOperator> {
    if eps == 0.0 {
        return Ok(x.clone());
    }
    x.combine(1.0 - eps, noise, eps)
}

struct Runner<'a> {
    problem: &'a Problem,
    config: &'a OptimizerConfig,
    x: DVector<f64>,
    ev: Evaluation,
    best: (f64, DVector<f64>),
    rows: Vec<TraceRow>,
}

impl Runner<'_> {
    fn record(&mut self, kind: StepKind) {
        let rank = self.ev.visibility.rank();
        if rank < self.best.0 {
            self.best = (rank, self.x.clone());
        }
        self.rows.push(TraceRow {
            index: self.rows.len(),
            p_crit: self.ev.visibility,
            mu1: self.ev.offset,
            step_kind: kind,
            critical_bipartition: self.problem.bipartitions[self.ev.critical].to_string(),
        });
    }

    fn osc(&mut self) -> Result<()> {
        self.x = self.problem.step_osc(&self.x, &self.ev, self.config.step_size)?;
        self.ev = self.problem.evaluate(&self.x)?;
        Ok(())
    }

    fn ops(&mut self, side: Side) -> Result<()> {
        self.x = self.problem.step_ops(&self.x, &self.ev, side, self.config.step_size)?;
        self.ev = self.problem.evaluate(&self.x)?;
        Ok(())
    }

    fn iterate(&mut self, kind: StepKind) -> Result<()> {
        match kind {
            StepKind::Osc => self.osc()?,
            StepKind::Ops => {
                self.ops(Side::A)?;
                self.ops(Side::B)?;
            }
            StepKind::Alternating => {
                self.osc()?;
                self.ops(Side::A)?;
                self.ops(Side::B)?;
            }
            StepKind::Initial => {}
        }
        self.record(kind);
        Ok(())
    }

    /// Window-mean plateau test over the trailing `2 * window` rows.
    fn plateaued(&self, since: usize) -> bool {
        let w = self.config.convergence_window;
        let rows = &self.rows[since..];
        if rows.len() < 2 * w {
            return false;
        }
        let mean = |r: &[TraceRow]| r.iter().map(|x| x.p_crit.rank()).sum::<f64>() / w as f64;
        let (a, b) = (
            mean(&rows[rows.len() - 2 * w..rows.len() - w]),
            mean(&rows[rows.len() - w..]),
        );
        a.is_finite() && b.is_finite() && ((a - b) / b).abs() < self.config.convergence_tol
    }

    fn run_phase(&mut self, kind: StepKind, budget: usize) -> Result<bool> {
        let since = self.rows.len();
        for _ in 0..budget {
            self.iterate(kind)?;
            if self.plateaued(since) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn run(
    x0: &HermitianOperator,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    config.validate()?;
    if x0.dims() != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "start operator over {:?}, target over {:?}",
            x0.dims(),
            rho.dims()
        )));
    }
    let noise = random_density(rho.dims(), config.seed);
    let eps = config.perturbation_eps;
    let (rho_p, sigma_p, x0_p) = (
        perturbed(rho, &noise, eps)?,
        perturbed(sigma, &noise, eps)?,
        perturbed(x0, &noise, eps)?,
    );
    let problem = Problem::new(&rho_p, &sigma_p)?;
    let x = Coordinates::from_operator(&x0_p).values().clone();
    let ev = problem.evaluate(&x)?;
    let mut runner = Runner {
        problem: &problem,
        config,
        best: (f64::INFINITY, x.clone()),
        x,
        ev,
        rows: Vec::new(),
    };
    runner.record(StepKind::Initial);
    let initial_visibility = runner.ev.visibility;

    let mut phase2_start = None;
    let converged = match config.schedule {
        Schedule::OscOnly => runner.run_phase(StepKind::Osc, config.max_iters)?,
        Schedule::OpsOnly => runner.run_phase(StepKind::Ops, config.max_iters)?,
        Schedule::Alternating => runner.run_phase(StepKind::Alternating, config.max_iters)?,
        Schedule::TwoPhase => {
            let phase1 = runner.run_phase(StepKind::Osc, config.phase1_max_iters)?;
            log::info!(
                "phase 1 {} after {} iterations at p = {}",
                if phase1 { "plateaued" } else { "stopped" },
                runner.rows.len() - 1,
                runner.ev.visibility
            );
            phase2_start = Some(runner.rows.len());
            runner.run_phase(StepKind::Alternating, config.max_iters)?
        }
    };

    let best_x = runner.best.1.clone();
    let best_op = problem.coords(&best_x).to_operator().with_label("optimized");
    let final_witness = gme_witness(&best_op)?;
    let best_visibility = visibility(&final_witness, &rho_p, &sigma_p)?;
    let final_visibility = visibility(&final_witness, rho, sigma)?;
    Ok(OptimizationTrace {
        iterations: runner.rows,
        final_witness,
        best_visibility,
        final_visibility,
        initial_visibility,
        phase2_start,
        converged,
    })
}
