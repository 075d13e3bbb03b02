//! Gradient optimization of a GME witness for the three-qubit W state,
//! starting from the state itself. Writes the trace to `w3-trace.csv`.
//!
//! cargo run --release --example optimize_w3

use oswit::operator::HermitianOperator;
use oswit::optimizer::{optimize, OptimizerConfig};
use oswit::states::state_by_name;

fn main() -> oswit::error::Result<()> {
    env_logger::init();
    let rho = state_by_name("w3")?.density;
    let white = HermitianOperator::maximally_mixed(rho.dims());
    let trace = optimize(&rho, &rho, &white, &OptimizerConfig::default())?;
    println!("start  p = {}", trace.initial_visibility);
    println!(
        "final  p = {} (fidelity witness: 13/21 = {:.6})",
        trace.final_visibility,
        13.0 / 21.0
    );
    println!(
        "{} iterations, best at {}, alternating phase from {:?}, plateau: {}",
        trace.iterations.len(),
        trace.best_index(),
        trace.phase2_start,
        trace.converged
    );
    trace.save_csv("w3-trace.csv")?;
    trace.final_witness.save("w3-witness.json")?;
    Ok(())
}
