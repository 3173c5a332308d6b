//! Spread of m-wise per-sample values on an 11×11 inverted lattice.
//!
//! Usage: `cargo run --release --example sample_distribution -- [samples] [m...]`

use superrad::geometry::build_square_lattice;
use superrad::sampling::{sample_distribution, SamplingConfig};
use superrad::scenario::Scenario;

fn main() -> superrad::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let samples = args.first().copied().unwrap_or(2000);
    let ms = if args.len() > 1 {
        args[1..].to_vec()
    } else {
        vec![3, 4, 5, 6]
    };

    let scenario = Scenario::inverted(build_square_lattice(11, 0.1, [0.0, 0.0, 1.0])?);
    println!("m  mean      std       min       max");
    for m in ms {
        let dist = sample_distribution(&scenario, &SamplingConfig::mwise(m, samples, 121), 20)?;
        println!(
            "{m:<2} {:.6}  {:.6}  {:.6}  {:.6}",
            dist.mean, dist.std, dist.min, dist.max
        );
        let peak = *dist.histogram.counts.iter().max().unwrap_or(&1) as f64;
        for (c, lo) in dist.histogram.counts.iter().zip(&dist.histogram.edges) {
            println!(
                "   {lo:>8.4} {}",
                "#".repeat((40.0 * *c as f64 / peak).round() as usize)
            );
        }
    }
    Ok(())
}
