//! Which estimator wins as the chain grows: mean percentage error of the
//! pairwise and m-wise methods against the exact curve for N = 3..12.
//!
//! Usage: `cargo run --release --example error_scan -- [scenario.json]`

use std::path::PathBuf;

use superrad::harness::{run_error_scan, RunOptions};
use superrad::scenario::{MethodKind, ScenarioConfig};

fn main() -> superrad::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/error_scan_chain.json")
        });
    let cfg = ScenarioConfig::load(&path)?;
    let res = run_error_scan(&cfg, &RunOptions::default())?;

    let methods = [
        MethodKind::Pairwise,
        MethodKind::MWise,
        MethodKind::PairwiseCorr,
        MethodKind::MWiseCorr,
    ];
    print!(" N");
    for m in methods {
        print!(" {:>13}", m.as_str());
    }
    println!("  rule");
    for (n, rule) in &res.rule_of_thumb {
        print!("{n:>2}");
        for m in methods {
            print!(" {:>12.3}%", res.error(*n, m).unwrap_or(f64::NAN));
        }
        println!("  {rule:?}");
    }
    println!(
        "pairwise beats m-wise from N = {:?} (uncorrected), {:?} (corrected); 2m = {}",
        res.crossover_uncorrected,
        res.crossover_corrected,
        2 * res.m
    );
    Ok(())
}
