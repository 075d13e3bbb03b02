//! Lower bounds on entanglement measures from a single witness expectation
//! value, compared with the exact values for pure states.
//!
//! cargo run --example measure_bounds

use oswit::bipartition::Bipartition;
use oswit::bounds::{bipartite_bounds, gme_bounds, pure_state_oracle, GmeDimension, Measure};
use oswit::states::{random_pure, state_by_name};

fn main() -> oswit::error::Result<()> {
    for (label, psi) in [
        ("bell:3", state_by_name("bell:3")?.pure.unwrap()),
        ("random 3x3", random_pure(&[3, 3], 7)),
    ] {
        let rho = psi.projector();
        let bp = Bipartition::new(&[0], psi.dims())?;
        let report = bipartite_bounds(&rho, &rho, &bp)?;
        println!("{label}: S = {:.6}, m = {}", report.s, report.m);
        for measure in Measure::ALL {
            let exact = pure_state_oracle(&psi, &bp, measure)?;
            println!("  {measure:18} bound {:.6} <= exact {exact:.6}", report.bound(measure));
        }
    }

    for name in ["w3", "ghz3", "w4"] {
        let rho = state_by_name(name)?.density;
        let r = gme_bounds(&rho, &rho, GmeDimension::PerBipartition)?;
        println!("{name}: GME concurrence >= {:.6}", r.bound(Measure::Concurrence));
    }
    Ok(())
}
