//! The 3x3 UPB bound-entangled state. PPT criteria miss it; a witness
//! optimized from a random start reaches the realignment threshold.
//!
//! cargo run --release --example upb_bound_entangled

use oswit::bipartition::Bipartition;
use oswit::operator::HermitianOperator;
use oswit::optimizer::{optimize, OptimizerConfig, Schedule};
use oswit::osd::osd;
use oswit::states::{random_density, state_by_name};
use oswit::witness::ccnr_witness;

fn main() -> oswit::error::Result<()> {
    let rho = state_by_name("upb")?.density;
    let white = HermitianOperator::maximally_mixed(rho.dims());
    let bp = Bipartition::new(&[0], rho.dims())?;
    println!("CCNR sum {:.6} > 1", osd(&rho, &bp)?.coefficient_sum());

    let config = OptimizerConfig {
        schedule: Schedule::Alternating,
        ..Default::default()
    };
    let x0 = random_density(rho.dims(), config.seed);
    let trace = optimize(&x0, &rho, &white, &config)?;
    let ccnr = ccnr_witness(&rho, &bp)?.visibility(&rho, &white)?;
    println!("random start: {}", trace.initial_visibility);
    println!(
        "optimized:    {} after {} iterations",
        trace.final_visibility,
        trace.iterations.len()
    );
    println!("CCNR witness: {ccnr}");
    Ok(())
}
