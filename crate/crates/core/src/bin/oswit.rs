use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use oswit::bipartition::Bipartition;
use oswit::bounds::{bipartite_bounds, gme_bounds, GmeDimension};
use oswit::error::Error;
use oswit::manifest::{parse_seed, seed_override, RunManifest};
use oswit::operator::HermitianOperator;
use oswit::optimizer::{optimize, OptimizerConfig, Schedule};
use oswit::osd::{osd, SymmetryBreaking};
use oswit::reproduce::{run_suite, Suite};
use oswit::schmidt_number::{fidelity_sn_witness, sn_witness};
use oswit::states::{random_density, state_by_name};
use oswit::witness::{ccnr_witness, fidelity_witness, gme_witness, osd_witness, Witness};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "oswit", version, about = "Operator Schmidt decomposition witnesses")]
struct Cli {
    /// Machine-readable JSON on stdout; logs go to stderr.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operator Schmidt coefficients across one bipartition.
    Decompose {
        #[command(flatten)]
        input: Input,
        /// Bipartition label such as `0|12`; defaults to the first party alone.
        #[arg(long)]
        bipartition: Option<String>,
        /// Mix in a seeded random density matrix with this weight first.
        #[arg(long)]
        perturb: Option<f64>,
        #[arg(long, value_parser = parse_seed_arg)]
        seed: Option<u64>,
    },
    /// Build a witness and write it as JSON.
    Witness {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = WitnessChoice::Gme)]
        kind: WitnessChoice,
        #[arg(long)]
        bipartition: Option<String>,
        /// Schmidt number for `sn` and `fidelity-sn` witnesses.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gradient optimization of a witness for a target state.
    Optimize {
        #[arg(long)]
        state: String,
        /// `white` or a matrix JSON file.
        #[arg(long, default_value = "white")]
        noise: String,
        #[arg(long)]
        schedule: Option<Schedule>,
        #[arg(long, value_enum, default_value_t = Start::Target)]
        start: Start,
        /// Optimizer configuration JSON; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_seed_arg)]
        seed: Option<u64>,
        #[arg(long)]
        step_size: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        phase1_max_iters: Option<usize>,
        #[arg(long)]
        perturbation_eps: Option<f64>,
        /// Directory for trace.csv, witness.json and manifest.json.
        #[arg(long, default_value = "oswit-run")]
        out: PathBuf,
    },
    /// Lower bounds on entanglement measures.
    Bounds {
        #[command(flatten)]
        input: Input,
        /// Observable JSON; defaults to the state itself.
        #[arg(long)]
        observable: Option<PathBuf>,
        /// Bipartite bounds across this split; without it, three or more
        /// parties give genuine multipartite bounds.
        #[arg(long)]
        bipartition: Option<String>,
        /// Use the largest single-party dimension as `m` for multipartite bounds.
        #[arg(long)]
        largest_party_m: bool,
    },
    /// Recompute published reference numbers.
    Reproduce {
        #[arg(long, value_enum)]
        suite: Vec<SuiteChoice>,
        #[arg(long, value_parser = parse_seed_arg)]
        seed: Option<u64>,
        /// Directory for the report and manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Named state, e.g. w3, dicke4-2, psi3:eps=0.1.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    state: Option<String>,
    /// Operator in matrix JSON format.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessChoice {
    Fidelity,
    Osd,
    Ccnr,
    Gme,
    Sn,
    FidelitySn,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Start {
    Target,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteChoice {
    Table1,
    #[value(name = "appendixA", alias = "appendixa")]
    AppendixA,
    #[value(name = "appendixC3", alias = "appendixc3")]
    AppendixC3,
    Measures,
    All,
}

fn parse_seed_arg(raw: &str) -> Result<u64, String> {
    parse_seed(raw).map_err(|e| e.to_string())
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { EXIT_USAGE } else { EXIT_NUMERICAL };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    json: bool,
}

impl Ctx {
    /// Prints `value` as JSON, or `human` otherwise.
    fn emit(&self, value: &serde_json::Value, human: impl FnOnce() -> String) {
        if self.json {
            println!(
                "{}",
                serde_json::to_string_pretty(value).expect("JSON value serializes")
            );
        } else {
            println!("{}", human());
        }
    }

    fn manifest(&self, manifest: &RunManifest, dir: Option<&Path>) -> Outcome {
        match dir {
            Some(dir) => manifest.save(dir.join("manifest.json"))?,
            None => eprintln!("{}", serde_json::to_string(manifest).map_err(Error::from)?),
        }
        Ok(())
    }
}

fn load_input(input: &Input) -> Result<(String, HermitianOperator), Error> {
    match (&input.state, &input.file) {
        (Some(name), _) => Ok((name.clone(), state_by_name(name)?.density)),
        (None, Some(path)) => Ok((path.display().to_string(), HermitianOperator::load(path)?)),
        (None, None) => Err(Error::InvalidParameter("give --state or --file".into())),
    }
}

fn bipartition(label: Option<&str>, dims: &[usize]) -> Result<Bipartition, Error> {
    match label {
        Some(l) => Bipartition::parse(l, dims),
        None => Bipartition::new(&[0], dims),
    }
}

fn decompose(ctx: &Ctx, input: &Input, bp: Option<&str>, perturb: Option<f64>, seed: Option<u64>) -> Outcome {
    let started = Instant::now();
    let (name, mut x) = load_input(input)?;
    let seed = seed_override(seed.unwrap_or(SymmetryBreaking::default().seed))?;
    if let Some(eps) = perturb {
        x = SymmetryBreaking { eps, seed }.apply(&x)?;
    }
    let bp = bipartition(bp, x.dims())?;
    let d = osd(&x, &bp)?;
    let value = json!({
        "input": name,
        "bipartition": bp.to_string(),
        "mu": d.mu(),
        "mu1": d.mu1(),
        "ccnr_value": d.coefficient_sum(),
        "effective_rank": d.effective_rank(),
    });
    ctx.emit(&value, || {
        let mu: Vec<String> = d
            .mu()
            .iter()
            .take(d.effective_rank())
            .map(|m| format!("{m:.6}"))
            .collect();
        format!(
            "{name} across {bp}\n  mu1 = {:.9}\n  sum of coefficients = {:.9}\n  coefficients = [{}]",
            d.mu1(),
            d.coefficient_sum(),
            mu.join(", ")
        )
    });
    let mut m = RunManifest::new(
        "decompose",
        json!({"input": name, "bipartition": bp.to_string(), "perturb": perturb}),
        perturb.map(|_| seed),
    );
    m.finish(started);
    ctx.manifest(&m, None)
}

fn witness(ctx: &Ctx, input: &Input, kind: WitnessChoice, bp: Option<&str>, k: usize, out: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let (name, x) = load_input(input)?;
    let pure = || -> Result<_, Error> {
        let name = input
            .state
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("fidelity witnesses need --state".into()))?;
        state_by_name(name)?
            .pure
            .ok_or_else(|| Error::InvalidParameter(format!("{name} is not a pure state")))
    };
    let bp_of = || bipartition(bp, x.dims());
    let w: Witness = match kind {
        WitnessChoice::Fidelity => fidelity_witness(&pure()?)?,
        WitnessChoice::Osd => osd_witness(&x, &bp_of()?)?,
        WitnessChoice::Ccnr => ccnr_witness(&x, &bp_of()?)?,
        WitnessChoice::Gme => gme_witness(&x)?,
        WitnessChoice::Sn => sn_witness(&x, &bp_of()?, k)?,
        WitnessChoice::FidelitySn => fidelity_sn_witness(&pure()?, &bp_of()?, k)?,
    };
    let mut m = RunManifest::new(
        "witness",
        json!({"input": name, "kind": w.kind().to_string(), "bipartition": bp, "k": k}),
        None,
    );
    match out {
        Some(path) => {
            w.save(path)?;
            m.output(path);
            ctx.emit(
                &json!({"kind": w.kind().to_string(), "offset": w.offset(), "path": path}),
                || {
                    format!(
                        "{} witness with offset {:.9} written to {}",
                        w.kind(),
                        w.offset(),
                        path.display()
                    )
                },
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&w.to_file()).map_err(Error::from)?),
    }
    m.finish(started);
    ctx.manifest(&m, None)
}

#[allow(clippy::too_many_arguments)]
fn run_optimize(
    ctx: &Ctx,
    state: &str,
    noise: &str,
    schedule: Option<Schedule>,
    start: Start,
    config_path: Option<&Path>,
    seed: Option<u64>,
    overrides: (Option<f64>, Option<usize>, Option<usize>, Option<f64>),
    out: &Path,
) -> Outcome {
    let started = Instant::now();
    let mut config = match config_path {
        Some(p) => OptimizerConfig::load(p)?,
        None => OptimizerConfig::default(),
    };
    let (step_size, max_iters, phase1, eps) = overrides;
    config.step_size = step_size.unwrap_or(config.step_size);
    config.max_iters = max_iters.unwrap_or(config.max_iters);
    config.phase1_max_iters = phase1.unwrap_or(config.phase1_max_iters);
    config.perturbation_eps = eps.unwrap_or(config.perturbation_eps);
    config.seed = seed_override(seed.unwrap_or(config.seed))?;
    if let Some(s) = schedule {
        config.schedule = s;
    } else if start == Start::Random && config_path.is_none() {
        config.schedule = Schedule::Alternating;
    }
    config.validate()?;

    let rho = state_by_name(state)?.density;
    let sigma = match noise {
        "white" => HermitianOperator::maximally_mixed(rho.dims()),
        path => HermitianOperator::load(path)?,
    };
    let x0 = match start {
        Start::Target => rho.clone(),
        Start::Random => random_density(rho.dims(), config.seed),
    };
    log::info!(
        "optimizing {state} with {} from {:?} start",
        config.schedule,
        if start == Start::Target { "target" } else { "random" }
    );
    let trace = optimize(&x0, &rho, &sigma, &config)?;

    std::fs::create_dir_all(out).map_err(Error::from)?;
    let (csv_path, witness_path) = (out.join("trace.csv"), out.join("witness.json"));
    trace.save_csv(&csv_path)?;
    trace.final_witness.save(&witness_path)?;
    let summary = json!({
        "state": state,
        "initial_visibility": trace.initial_visibility.value(),
        "final_visibility": trace.final_visibility.value(),
        "best_visibility_perturbed": trace.best_visibility.value(),
        "iterations": trace.iterations.len(),
        "phase2_start": trace.phase2_start,
        "converged": trace.converged,
        "offset": trace.final_witness.offset(),
        "trace": csv_path,
        "witness": witness_path,
    });
    ctx.emit(&summary, || {
        let improved = trace.final_visibility.rank() < trace.initial_visibility.rank() - 1e-9;
        format!(
            "{state}: p_crit {} -> {} after {} iterations{}\n  trace: {}\n  witness: {}",
            trace.initial_visibility,
            trace.final_visibility,
            trace.iterations.len(),
            if improved {
                ""
            } else {
                " (no improvement over the start)"
            },
            csv_path.display(),
            witness_path.display()
        )
    });
    let mut m = RunManifest::new(
        "optimize",
        json!({"state": state, "noise": noise, "start": format!("{}", if start == Start::Target { "target" } else { "random" }), "config": config}),
        Some(config.seed),
    );
    m.output(csv_path);
    m.output(witness_path);
    m.output(out.join("manifest.json"));
    m.finish(started);
    ctx.manifest(&m, Some(out))
}

fn bounds(ctx: &Ctx, input: &Input, observable: Option<&Path>, bp: Option<&str>, largest_party_m: bool) -> Outcome {
    let started = Instant::now();
    let (name, rho) = load_input(input)?;
    let x = match observable {
        Some(p) => HermitianOperator::load(p)?,
        None => rho.clone(),
    };
    let report = match (bp, rho.n_parties()) {
        (None, n) if n >= 3 => {
            let dim = if largest_party_m {
                GmeDimension::LargestParty
            } else {
                GmeDimension::PerBipartition
            };
            gme_bounds(&rho, &x, dim)?
        }
        (label, _) => bipartite_bounds(&rho, &x, &bipartition(label, rho.dims())?)?,
    };
    let value = serde_json::to_value(&report).map_err(Error::from)?;
    ctx.emit(&value, || {
        let lines: Vec<String> = report.bounds.iter().map(|(k, v)| format!("  {k} >= {v:.9}")).collect();
        format!(
            "{name}: S = {:.9}, m = {} ({:?})\n{}",
            report.s,
            report.m,
            report.context,
            lines.join("\n")
        )
    });
    let mut m = RunManifest::new(
        "bounds",
        json!({"input": name, "observable": observable, "bipartition": bp, "largest_party_m": largest_party_m}),
        None,
    );
    m.finish(started);
    ctx.manifest(&m, None)
}

fn reproduce(ctx: &Ctx, choices: &[SuiteChoice], seed: Option<u64>, out: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let mut suites: Vec<Suite> = Vec::new();
    for c in if choices.is_empty() {
        &[SuiteChoice::All][..]
    } else {
        choices
    } {
        match c {
            SuiteChoice::All => suites.extend(Suite::ALL),
            SuiteChoice::Table1 => suites.push(Suite::Table1),
            SuiteChoice::AppendixA => suites.push(Suite::AppendixA),
            SuiteChoice::AppendixC3 => suites.push(Suite::AppendixC3),
            SuiteChoice::Measures => suites.push(Suite::Measures),
        }
    }
    suites.dedup();
    let config = OptimizerConfig {
        seed: seed_override(seed.unwrap_or(OptimizerConfig::default().seed))?,
        ..Default::default()
    };
    let reports: Vec<_> = suites.iter().map(|&s| run_suite(s, &config)).collect();
    let value = serde_json::to_value(&reports).map_err(Error::from)?;
    ctx.emit(&value, || {
        let mut lines = Vec::new();
        for r in &reports {
            lines.push(format!("== {} ({:.1} s)", r.suite, r.wall_time_s));
            lines.extend(r.rows.iter().map(|row| row.to_string()));
        }
        lines.join("\n")
    });
    let mut m = RunManifest::new(
        "reproduce",
        json!({"suites": suites.iter().map(|s| s.to_string()).collect::<Vec<_>>()}),
        Some(config.seed),
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        let path = dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(&value).map_err(Error::from)?).map_err(Error::from)?;
        m.output(path);
        m.output(dir.join("manifest.json"));
    }
    m.finish(started);
    ctx.manifest(&m, out)?;
    let failed = reports.iter().flat_map(|r| &r.rows).filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Failure {
            code: EXIT_MISMATCH,
            message: format!("{failed} reproduction rows failed"),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = Ctx { json: cli.json };
    let outcome = match &cli.command {
        Command::Decompose {
            input,
            bipartition,
            perturb,
            seed,
        } => decompose(&ctx, input, bipartition.as_deref(), *perturb, *seed),
        Command::Witness {
            input,
            kind,
            bipartition,
            k,
            out,
        } => witness(&ctx, input, *kind, bipartition.as_deref(), *k, out.as_deref()),
        Command::Optimize {
            state,
            noise,
            schedule,
            start,
            config,
            seed,
            step_size,
            max_iters,
            phase1_max_iters,
            perturbation_eps,
            out,
        } => run_optimize(
            &ctx,
            state,
            noise,
            *schedule,
            *start,
            config.as_deref(),
            *seed,
            (*step_size, *max_iters, *phase1_max_iters, *perturbation_eps),
            out,
        ),
        Command::Bounds {
            input,
            observable,
            bipartition,
            largest_party_m,
        } => bounds(
            &ctx,
            input,
            observable.as_deref(),
            bipartition.as_deref(),
            *largest_party_m,
        ),
        Command::Reproduce { suite, seed, out } => reproduce(&ctx, suite, *seed, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
