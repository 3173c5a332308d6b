//! Coherently driven chain: stationary state from the direct and iterative
//! solvers, checked against long-time evolution, and its photon statistics.
//!
//! Usage: `cargo run --release --example driven_steady_state -- [n] [d] [rabi]`

use std::time::Instant;

use superrad::correlations::a2_zero_delay;
use superrad::em_env::{coeff_matrices, coupling_matrices, Flavor};
use superrad::geometry::{build_chain, DetectorConfig, DriveParams};
use superrad::quantum::{
    build_liouvillian, evolve, steady_state_with, DensityState, EvolveOptions, SteadyStateOptions,
    SteadyStateSolver,
};

fn main() -> superrad::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n = args.first().map_or(4, |&v| v as usize);
    let d = args.get(1).copied().unwrap_or(0.3);
    let rabi = args.get(2).copied().unwrap_or(5.0);

    let array = build_chain(n, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?;
    let couplings = coupling_matrices(&array)?;
    let drive = DriveParams::new(rabi, 0.0, [1.0, 0.0, 0.0], 1.0)?;
    let l = build_liouvillian(&couplings, Some(&drive), &array)?;

    let mut states = Vec::new();
    for solver in [SteadyStateSolver::Direct, SteadyStateSolver::Iterative] {
        let t = Instant::now();
        let opts = SteadyStateOptions {
            solver,
            ..SteadyStateOptions::default()
        };
        let rho = steady_state_with(&l, &opts)?;
        println!(
            "{solver:?}: {:.2} s, purity {:.6}",
            t.elapsed().as_secs_f64(),
            rho.purity()
        );
        states.push(rho);
    }
    let late = evolve(
        &DensityState::ground(n),
        &l,
        &[50.0],
        &EvolveOptions::default(),
    )?
    .remove(0);
    println!(
        "trace distance direct/iterative {:.2e}",
        states[0].trace_distance(&states[1])?
    );
    println!(
        "trace distance direct/evolved to t = 50 {:.2e}",
        states[0].trace_distance(&late)?
    );
    println!("excited populations {:.4?}", states[0].populations());

    let plain = DetectorConfig::along_x_and_y();
    let polarized = DetectorConfig::new(
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        Some([0.0, 0.0, 1.0]),
        Some([0.0, 0.0, 1.0]),
    )?;
    for (flavor, det) in [
        (Flavor::Total, None),
        (Flavor::Directional, Some(&plain)),
        (Flavor::PolarizedDirectional, Some(&polarized)),
    ] {
        let (a, b) = coeff_matrices(&array, &couplings, flavor, det)?;
        let g2 = a2_zero_delay(&states[0], &a, &b)?;
        println!("{:<22} {:.6}", flavor.as_str(), g2.value);
    }
    Ok(())
}
