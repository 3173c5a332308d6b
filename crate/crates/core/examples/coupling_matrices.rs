//! Collective decay and dipole shifts of a short chain, and how they fall
//! off with separation.
//!
//! Usage: `cargo run --example coupling_matrices -- [n] [d]`

use superrad::em_env::coupling_matrices;
use superrad::geometry::build_chain;

fn main() -> superrad::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n = args.first().map_or(4, |&v| v as usize);
    let d = args.get(1).copied().unwrap_or(0.2);

    let array = build_chain(n, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?;
    let c = coupling_matrices(&array)?;
    println!(
        "gamma (units of gamma_0), chain of {n} at d = {d}:\n{:.4}",
        c.gamma
    );
    println!("delta:\n{:.4}", c.delta);
    println!(
        "smallest collective decay rate: {:.4e}",
        c.gamma_min_eigenvalue()
    );

    println!("\n   d     gamma_12   delta_12");
    for i in 1..=10 {
        let d = 0.1 * i as f64;
        let c = coupling_matrices(&build_chain(2, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?)?;
        println!(
            "{d:>5.2} {:>10.5} {:>10.5}",
            c.gamma[(0, 1)],
            c.delta[(0, 1)]
        );
    }
    c.write_csv(std::io::stdout().lock(), d)?;
    Ok(())
}
