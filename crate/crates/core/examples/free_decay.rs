//! Undriven decay from full inversion: correlations at t = 2/γ₀ seen by two
//! detectors along x and y, exact against the sampling estimators.
//!
//! Usage: `cargo run --release --example free_decay -- [n] [t]`

use superrad::em_env::Flavor;
use superrad::geometry::{build_chain, DetectorConfig};
use superrad::sampling::{apply_offset, estimate, SamplingConfig};
use superrad::scenario::Scenario;

fn main() -> superrad::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n = args.first().map_or(7, |&v| v as usize);
    let t = args.get(1).copied().unwrap_or(2.0);

    println!("    d    exact  pw-corr  mw-corr (m = 4)");
    for d in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let s = Scenario::free_decay(build_chain(n, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?, t)
            .with_flavor(Flavor::Directional, Some(DetectorConfig::along_x_and_y()));
        let exact = s.evaluate()?.value;
        let pw = estimate(&s, &SamplingConfig::pairwise(2000, 5).with_offset(true))?;
        let mw = estimate(&s, &SamplingConfig::mwise(4, 100, 5))?;
        println!(
            "{d:>5.2} {exact:>8.4} {:>8.4} {:>8.4}",
            pw.mean,
            apply_offset(&mw, n)?.mean
        );
    }
    Ok(())
}
