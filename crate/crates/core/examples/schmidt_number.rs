//! Schmidt-number witnesses: closed-form lambda_k against a brute-force
//! search, then certification of Schmidt number 3 for two 3x3 and 4x4 states.
//!
//! cargo run --example schmidt_number

use oswit::bipartition::Bipartition;
use oswit::operator::HermitianOperator;
use oswit::schmidt_number::{fidelity_sn_witness, lambda_k, lambda_k_bruteforce, sn_witness};
use oswit::states::state_by_name;
use oswit::witness::ccnr_witness;

fn main() -> oswit::error::Result<()> {
    let mu = [0.9, 0.7, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01];
    for k in 2..=4 {
        let exact = lambda_k(&mu, k)?;
        let brute = lambda_k_bruteforce(&mu, k, 0.02)?;
        println!(
            "lambda_{k} = {:.6} ({:?}), brute force {:.6}",
            exact.lambda, exact.method, brute.lambda
        );
    }

    let rho = state_by_name("rho3")?.density;
    let bp = Bipartition::new(&[0], rho.dims())?;
    let x = ccnr_witness(&rho, &bp)?.observable().clone();
    let w = sn_witness(&x, &bp, 3)?;
    let p = w.visibility(&rho, &HermitianOperator::maximally_mixed(rho.dims()))?;
    println!("rho3: SN-3 witness offset {:.6}, visibility {p}", w.offset());

    let psi = state_by_name("psi3:eps=0.1")?.pure.unwrap();
    let bp = Bipartition::new(&[0], psi.dims())?;
    let w = fidelity_sn_witness(&psi, &bp, 3)?;
    println!(
        "psi3: fidelity SN-3 offset {:.6}, <W> = {:+.6}",
        w.offset(),
        w.evaluate(&psi.projector())?
    );
    Ok(())
}
