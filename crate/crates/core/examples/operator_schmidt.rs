//! Operator Schmidt decomposition of a few states, with the checks that make
//! it trustworthy: reconstruction and the realignment (CCNR) sum.
//!
//! cargo run --example operator_schmidt

use oswit::bipartition::{enumerate_bipartitions, Bipartition};
use oswit::osd::osd;
use oswit::states::state_by_name;
use oswit::witness::ccnr_value;

fn main() -> oswit::error::Result<()> {
    for name in ["bell", "bell:3", "upb"] {
        let rho = state_by_name(name)?.density;
        let bp = Bipartition::new(&[0], rho.dims())?;
        let d = osd(&rho, &bp)?;
        let residual = d.reconstruct().combine(1.0, &rho, -1.0)?.frobenius_norm();
        println!(
            "{name:7} {bp}: rank {}, mu1 {:.6}, sum {:.6} (CCNR {:.6}), reconstruction {residual:.1e}",
            d.effective_rank(),
            d.mu1(),
            d.coefficient_sum(),
            ccnr_value(&rho, &bp)?,
        );
    }

    // every bipartition of a three-qubit W state
    let w3 = state_by_name("w3")?.density;
    for bp in enumerate_bipartitions(3, w3.dims())? {
        let mu: Vec<String> = osd(&w3, &bp)?.mu().iter().take(4).map(|m| format!("{m:.4}")).collect();
        println!("w3 {bp}: {}", mu.join(" "));
    }
    Ok(())
}
