//! Superradiant burst of a decaying inverted chain: exact emission rate
//! against m-wise sampled traces.
//!
//! Usage: `cargo run --release --example emission_trace -- [n] [d] [samples] [m...]`

use std::time::Instant;

use superrad::geometry::build_chain;
use superrad::sampling::{emission_trace, mwise_emission_trace};
use superrad::scenario::{Scenario, TraceNormalization};

fn main() -> superrad::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|a| a.parse().ok()).unwrap_or(9);
    let d: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(0.1);
    let samples: usize = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(100);
    let ms: Vec<usize> = args.iter().skip(3).filter_map(|a| a.parse().ok()).collect();
    let ms = if ms.is_empty() { vec![2, 4, 6] } else { ms };

    let scenario = Scenario::inverted(build_chain(n, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?);
    let times: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();

    let t = Instant::now();
    let exact = emission_trace(&scenario, &times)?;
    eprintln!("exact N = {n}: {:.1} s", t.elapsed().as_secs_f64());
    let mut columns = vec![("exact".to_string(), exact)];
    for m in ms {
        let t = Instant::now();
        let trace = mwise_emission_trace(
            &scenario,
            &times,
            m,
            samples,
            1,
            TraceNormalization::PerSample,
        )?;
        eprintln!("m = {m}: {:.1} s", t.elapsed().as_secs_f64());
        columns.push((format!("m={m}"), trace));
    }

    print!("{:>5}", "t");
    for (name, _) in &columns {
        print!(" {name:>8}");
    }
    println!();
    for (i, t) in times.iter().enumerate() {
        print!("{t:>5.2}");
        for (_, v) in &columns {
            print!(" {:>8.4}", v[i]);
        }
        println!();
    }
    Ok(())
}
