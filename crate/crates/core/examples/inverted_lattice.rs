//! Fully inverted 8×8 lattice: closed form against both sampling estimators,
//! with and without offset corrections.
//!
//! Usage: `cargo run --release --example inverted_lattice -- [samples_pairwise] [samples_mwise] [m]`

use superrad::geometry::build_square_lattice;
use superrad::sampling::{apply_offset, mwise_estimate, pairwise_estimate, SamplingConfig};
use superrad::scenario::Scenario;

fn main() -> superrad::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let s2 = args.first().copied().unwrap_or(10_000);
    let sm = args.get(1).copied().unwrap_or(1_000);
    let m = args.get(2).copied().unwrap_or(6);

    println!("    d    exact  pairwise  pw-corr    m-wise   mw-corr");
    for i in 0..=20 {
        let d = 0.05 * i as f64;
        let array = if i == 0 {
            superrad::geometry::EmitterArray::coincident(64, [0.0, 0.0, 1.0])?
        } else {
            build_square_lattice(8, d, [0.0, 0.0, 1.0])?
        };
        let s = Scenario::inverted(array);
        let exact = s.closed_form()?;
        let pw = pairwise_estimate(&s, &SamplingConfig::pairwise(s2, 1))?;
        let mw = mwise_estimate(&s, &SamplingConfig::mwise(m, sm, 1))?;
        println!(
            "{d:>5.2} {exact:>8.4} {:>9.4} {:>8.4} {:>9.4} {:>9.4}",
            pw.mean,
            apply_offset(&pw, 64)?.mean,
            mw.mean,
            apply_offset(&mw, 64)?.mean
        );
    }
    Ok(())
}
