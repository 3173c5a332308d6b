use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use superrad::harness::{
    resolve_out_dir, write_emission, write_error_scan, write_sweep, RunOptions,
};
use superrad::scenario::ScenarioConfig;

/// Photon correlations of emitter arrays, exact and sampled.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    #[command(subcommand)]
    Run(Run),
}

#[derive(Subcommand)]
enum Run {
    /// Correlation value per method over the separation grid.
    Sweep(Common),
    /// Mean percentage error of the estimators against exact curves over N.
    ErrorScan(Common),
    /// Normalized emission rate of the decaying inverted array.
    Emission(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the sample pool (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, env = "SUPERRAD_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Allow exact solves beyond the default register limits.
    #[arg(long)]
    unsafe_dims: bool,
    /// Write per-sample values alongside the sweep CSV.
    #[arg(long)]
    samples: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(run) = cli.command;
    let (name, common) = match &run {
        Run::Sweep(c) => ("sweep", c),
        Run::ErrorScan(c) => ("error-scan", c),
        Run::Emission(c) => ("emission", c),
    };
    let result = (|| {
        let cfg = ScenarioConfig::load(&common.config)?;
        let opts = RunOptions {
            seed: common.seed,
            unsafe_dims: common.unsafe_dims,
            write_samples: common.samples,
        };
        let dir = resolve_out_dir(common.out_dir.clone());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads.unwrap_or(0))
            .build()
            .map_err(|e| superrad::Error::Validation(e.to_string()))?;
        pool.install(|| match run {
            Run::Sweep(_) => write_sweep(&cfg, &opts, &dir).map(|_| ()),
            Run::ErrorScan(_) => write_error_scan(&cfg, &opts, &dir).map(|r| {
                println!(
                    "crossover N: uncorrected {:?}, corrected {:?}",
                    r.crossover_uncorrected, r.crossover_corrected
                )
            }),
            Run::Emission(_) => write_emission(&cfg, &opts, &dir).map(|_| ()),
        })?;
        println!("{name}: wrote {}", dir.display());
        Ok::<_, superrad::Error>(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
