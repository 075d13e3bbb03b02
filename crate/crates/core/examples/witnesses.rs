//! Fidelity, OSD, CCNR and multipartite witnesses side by side, compared by
//! the white-noise visibility they certify (lower is stronger).
//!
//! cargo run --example witnesses

use oswit::bipartition::Bipartition;
use oswit::operator::HermitianOperator;
use oswit::states::state_by_name;
use oswit::witness::{ccnr_witness, fidelity_witness, gme_witness, osd_witness, Witness};

fn report(label: &str, w: &Witness, rho: &HermitianOperator) -> oswit::error::Result<()> {
    let white = HermitianOperator::maximally_mixed(rho.dims());
    let p = w.visibility(rho, &white)?;
    println!(
        "{label:28} offset {:.6}  <W> {:+.6}  p {p}",
        w.offset(),
        w.evaluate(rho)?
    );
    Ok(())
}

fn main() -> oswit::error::Result<()> {
    let bell = state_by_name("bell:3")?;
    let bp = Bipartition::new(&[0], bell.dims())?;
    report(
        "bell:3 fidelity",
        &fidelity_witness(bell.pure.as_ref().unwrap())?,
        &bell.density,
    )?;
    report(
        "bell:3 OSD of the state",
        &osd_witness(&bell.density, &bp)?,
        &bell.density,
    )?;
    report("bell:3 CCNR", &ccnr_witness(&bell.density, &bp)?, &bell.density)?;

    for name in ["w3", "ghz3", "dicke4-2"] {
        let s = state_by_name(name)?;
        report(
            &format!("{name} fidelity"),
            &fidelity_witness(s.pure.as_ref().unwrap())?,
            &s.density,
        )?;
        let w = gme_witness(&s.density)?;
        report(&format!("{name} GME (X = rho)"), &w, &s.density)?;
        if let Some(cert) = w.certificate() {
            println!("{:28} critical bipartition {}", "", cert.critical_bipartition());
        }
    }
    Ok(())
}
