//! Runs the fast reproduction suites and prints one line per reference
//! number. The `table1` suite takes about two minutes in release mode; pass
//! `all` to include it.
//!
//! cargo run --release --example reproduce_suites [all]

use oswit::optimizer::OptimizerConfig;
use oswit::reproduce::{run_suite, Suite};

fn main() {
    let all = std::env::args().any(|a| a == "all");
    let suites: Vec<Suite> = Suite::ALL.into_iter().filter(|s| all || *s != Suite::Table1).collect();
    let config = OptimizerConfig::default();
    let mut failed = 0;
    for suite in suites {
        let report = run_suite(suite, &config);
        println!("== {suite} ({:.1} s)", report.wall_time_s);
        for row in &report.rows {
            println!("{row}");
        }
        failed += report.rows.iter().filter(|r| !r.pass).count();
    }
    println!("{failed} rows failed");
}
