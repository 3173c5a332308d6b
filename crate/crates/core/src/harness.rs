//! Sweeps, error scans and emission traces driven by scenario files, with
//! CSV output and a JSON run manifest.
//!
//! Numerical results depend only on the configuration and seed. Timings and
//! the timestamp are kept out of the CSV files and live in the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{validation, Result};
use crate::quantum::Capacity;
use crate::sampling::{
    apply_offset, emission_trace, estimate, mean_percentage_error, mwise_emission_trace,
    mwise_exhaustive, optimal_method, OptimalMethod, SamplingConfig, SamplingEstimate,
};
use crate::scenario::{MethodKind, Scenario, ScenarioConfig};

/// Settings that are not part of the scenario file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces the file's seed.
    pub seed: Option<u64>,
    /// Lift the exact-solver capacity limits.
    pub unsafe_dims: bool,
    /// Also write per-sample CSV files.
    pub write_samples: bool,
}

impl RunOptions {
    fn capacity(&self) -> Capacity {
        if self.unsafe_dims {
            Capacity::unsafe_dims()
        } else {
            Capacity::default()
        }
    }

    /// The configuration actually run, with overrides applied.
    pub fn effective(&self, cfg: &ScenarioConfig) -> ScenarioConfig {
        let mut cfg = cfg.clone();
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg
    }
}

/// SHA-256 of the canonical JSON encoding of `cfg`.
pub fn fingerprint(cfg: &ScenarioConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub d_over_lambda: f64,
    pub method: MethodKind,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub d_over_lambda: f64,
    pub method: MethodKind,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub fingerprint: String,
    pub rows: Vec<SweepRow>,
    pub timings: Vec<Timing>,
    /// Raw sampling estimates keyed by sweep index, for per-sample output.
    pub estimates: Vec<(usize, SamplingEstimate)>,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn prepared(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    spec: &crate::scenario::ArraySpec,
    d: f64,
) -> Result<Scenario> {
    Ok(cfg.scenario(spec, d)?.with_capacity(opts.capacity()))
}

/// Evaluates every requested method at every sweep point.
///
/// Sampled methods at all sweep points share the run seed, so the same
/// subsets are drawn at each separation.
pub fn run_sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<SweepResult> {
    let cfg = opts.effective(cfg);
    cfg.check()?;
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let mut estimates = Vec::new();
    let s = &cfg.sampling;
    let wants = |k: MethodKind| cfg.methods.contains(&k);
    for (i, d) in cfg.sweep.points().into_iter().enumerate() {
        let scenario = prepared(&cfg, opts, &cfg.array, d)?;
        let mut push = |method, value, std_error, started| {
            rows.push(SweepRow {
                d_over_lambda: d,
                method,
                value,
                std_error,
            });
            timings.push(Timing {
                d_over_lambda: d,
                method,
                wall_time_ms: ms_since(started),
            });
        };
        if wants(MethodKind::Exact) {
            let t = Instant::now();
            push(MethodKind::Exact, scenario.evaluate()?.value, 0.0, t);
        }
        if wants(MethodKind::ClosedForm) {
            let t = Instant::now();
            push(MethodKind::ClosedForm, scenario.closed_form()?, 0.0, t);
        }
        let sampled = [
            (
                MethodKind::Pairwise,
                MethodKind::PairwiseCorr,
                SamplingConfig::pairwise(s.samples_pairwise, cfg.seed),
            ),
            (
                MethodKind::MWise,
                MethodKind::MWiseCorr,
                SamplingConfig::mwise(s.m, s.samples_mwise, cfg.seed),
            ),
        ];
        for (plain, corr, sc) in sampled {
            if !(wants(plain) || wants(corr)) {
                continue;
            }
            let t = Instant::now();
            let raw = estimate(&scenario, &sc)?;
            if wants(plain) {
                push(plain, raw.mean, raw.std_error, t);
            }
            if wants(corr) {
                let c = apply_offset(&raw, scenario.len())?;
                push(corr, c.mean, c.std_error, t);
            }
            estimates.push((i, raw));
        }
    }
    Ok(SweepResult {
        fingerprint: fingerprint(&cfg),
        rows,
        timings,
        estimates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanCurvePoint {
    pub n: usize,
    pub d_over_lambda: f64,
    pub method: MethodKind,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanError {
    pub n: usize,
    pub method: MethodKind,
    pub mean_percentage_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorScanResult {
    pub fingerprint: String,
    pub m: usize,
    pub curves: Vec<ScanCurvePoint>,
    pub errors: Vec<ScanError>,
    /// First N at which the uncorrected pairwise error drops below the
    /// uncorrected m-wise error.
    pub crossover_uncorrected: Option<usize>,
    /// Same comparison between the corrected methods.
    pub crossover_corrected: Option<usize>,
    pub rule_of_thumb: Vec<(usize, OptimalMethod)>,
    pub timings: Vec<(usize, f64)>,
}

impl ErrorScanResult {
    pub fn error(&self, n: usize, method: MethodKind) -> Option<f64> {
        self.errors
            .iter()
            .find(|e| e.n == n && e.method == method)
            .map(|e| e.mean_percentage_error)
    }

    fn crossover(&self, pairwise: MethodKind, mwise: MethodKind) -> Option<usize> {
        let mut ns: Vec<usize> = self.errors.iter().map(|e| e.n).collect();
        ns.dedup();
        ns.into_iter().find(|&n| {
            self.error(n, pairwise)
                .zip(self.error(n, mwise))
                .is_some_and(|(p, m)| p < m)
        })
    }
}

/// Mean percentage error of both estimators, with and without offsets,
/// against the exact curve for each chain length in the scan range.
///
/// The reference curve is the closed form when the state is the inverted
/// one and an exact solve otherwise. For N ≤ m the m-wise estimate is the
/// exhaustive one at m = N, which equals the exact value.
pub fn run_error_scan(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ErrorScanResult> {
    let cfg = opts.effective(cfg);
    cfg.check()?;
    let scan = cfg
        .error_scan
        .as_ref()
        .ok_or_else(|| validation("config has no error_scan section"))?;
    let s = &cfg.sampling;
    let grid = cfg.sweep.points();
    let mut curves = Vec::new();
    let mut errors = Vec::new();
    let mut timings = Vec::new();
    let mut rule = Vec::new();
    for n in scan.n_min..=scan.n_max {
        let started = Instant::now();
        let spec = cfg.array.with_count(n)?;
        let mut by_method: Vec<(MethodKind, Vec<f64>)> = Vec::new();
        let mut record = |method: MethodKind, d: f64, value: f64, std_error: f64| {
            curves.push(ScanCurvePoint {
                n,
                d_over_lambda: d,
                method,
                value,
                std_error,
            });
            match by_method.iter_mut().find(|(k, _)| *k == method) {
                Some((_, v)) => v.push(value),
                None => by_method.push((method, vec![value])),
            }
        };
        for &d in &grid {
            let scenario = prepared(&cfg, opts, &spec, d)?;
            let exact = if scenario.is_inverted_at_zero() {
                scenario.closed_form()?
            } else {
                scenario.evaluate()?.value
            };
            record(MethodKind::Exact, d, exact, 0.0);
            let pw = estimate(
                &scenario,
                &SamplingConfig::pairwise(s.samples_pairwise, cfg.seed),
            )?;
            record(MethodKind::Pairwise, d, pw.mean, pw.std_error);
            let pc = apply_offset(&pw, n)?;
            record(MethodKind::PairwiseCorr, d, pc.mean, pc.std_error);
            let mw = if s.m < n {
                estimate(
                    &scenario,
                    &SamplingConfig::mwise(s.m, s.samples_mwise, cfg.seed),
                )?
            } else {
                mwise_exhaustive(&scenario, n)?
            };
            record(MethodKind::MWise, d, mw.mean, mw.std_error);
            let mc = if mw.m < n { apply_offset(&mw, n)? } else { mw };
            record(MethodKind::MWiseCorr, d, mc.mean, mc.std_error);
        }
        let exact = by_method[0].1.clone();
        for (method, values) in &by_method[1..] {
            errors.push(ScanError {
                n,
                method: *method,
                mean_percentage_error: mean_percentage_error(&exact, values)?,
            });
        }
        rule.push((n, optimal_method(n, s.m)));
        timings.push((n, ms_since(started)));
    }
    let mut out = ErrorScanResult {
        fingerprint: fingerprint(&cfg),
        m: s.m,
        curves,
        errors,
        crossover_uncorrected: None,
        crossover_corrected: None,
        rule_of_thumb: rule,
        timings,
    };
    out.crossover_uncorrected = out.crossover(MethodKind::Pairwise, MethodKind::MWise);
    out.crossover_corrected = out.crossover(MethodKind::PairwiseCorr, MethodKind::MWiseCorr);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub d_over_lambda: f64,
    pub time: f64,
    /// `exact` or `m-wise`.
    pub series: &'static str,
    /// Sample size for sampled series.
    pub m: Option<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmissionResult {
    pub fingerprint: String,
    pub points: Vec<TracePoint>,
}

impl EmissionResult {
    /// Values of one series at one separation, in time order.
    pub fn series(&self, d: f64, m: Option<usize>) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.d_over_lambda == d && p.m == m)
            .map(|p| p.value)
            .collect()
    }
}

/// Normalized emission rate of the free-decaying inverted array: exact
/// (when the array fits the evolution capacity) and m-wise sampled for each
/// requested m.
pub fn run_emission_trace(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<EmissionResult> {
    let cfg = opts.effective(cfg);
    cfg.check()?;
    let em = cfg
        .emission
        .as_ref()
        .ok_or_else(|| validation("config has no emission section"))?;
    let times = em.times.points();
    let mut points = Vec::new();
    for d in cfg.sweep.points() {
        let scenario = prepared(&cfg, opts, &cfg.array, d)?;
        let mut push = |series, m, values: Vec<f64>| {
            for (&time, value) in times.iter().zip(values) {
                points.push(TracePoint {
                    d_over_lambda: d,
                    time,
                    series,
                    m,
                    value,
                });
            }
        };
        if scenario.len() <= scenario.capacity.evolution {
            push("exact", None, emission_trace(&scenario, &times)?);
        }
        for &m in &em.m_values {
            push(
                "m-wise",
                Some(m),
                mwise_emission_trace(&scenario, &times, m, em.samples, cfg.seed, em.normalization)?,
            );
        }
    }
    Ok(EmissionResult {
        fingerprint: fingerprint(&cfg),
        points,
    })
}

/// Output directory: the explicit flag, else `SUPERRAD_OUT_DIR`, else `out`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SUPERRAD_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    command: &'a str,
    tool: &'static str,
    version: &'static str,
    fingerprint: &'a str,
    seed: u64,
    unsafe_dims: bool,
    config: &'a ScenarioConfig,
    outputs: Vec<String>,
    timings: T,
    total_ms: f64,
    /// Seconds since the Unix epoch; the only field that changes between
    /// identical runs.
    timestamp: u64,
}

#[allow(clippy::too_many_arguments)]
fn write_manifest<T: Serialize>(
    dir: &Path,
    command: &str,
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    fp: &str,
    outputs: Vec<String>,
    timings: T,
    started: Instant,
) -> Result<()> {
    let m = Manifest {
        command,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        fingerprint: fp,
        seed: cfg.seed,
        unsafe_dims: opts.unsafe_dims,
        config: cfg,
        outputs,
        timings,
        total_ms: ms_since(started),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)?)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs a sweep and writes `sweep.csv` and `manifest.json` to `dir`.
pub fn write_sweep(cfg: &ScenarioConfig, opts: &RunOptions, dir: &Path) -> Result<SweepResult> {
    let started = Instant::now();
    let res = run_sweep(cfg, opts)?;
    fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("sweep.csv"))?;
    w.write_record(["d_over_lambda", "method", "value", "std_error"])?;
    for r in &res.rows {
        w.write_record([
            r.d_over_lambda.to_string(),
            r.method.as_str().to_string(),
            r.value.to_string(),
            r.std_error.to_string(),
        ])?;
    }
    w.flush()?;
    let mut outputs = vec!["sweep.csv".to_string()];
    if opts.write_samples {
        fs::create_dir_all(dir.join("samples"))?;
        for (i, est) in &res.estimates {
            let name = format!("samples/{}_{i:03}.csv", est.method.as_str());
            est.write_samples_csv(fs::File::create(dir.join(&name))?)?;
            outputs.push(name);
        }
    }
    let eff = opts.effective(cfg);
    write_manifest(
        dir,
        "sweep",
        &eff,
        opts,
        &res.fingerprint,
        outputs,
        &res.timings,
        started,
    )?;
    Ok(res)
}

/// Runs an error scan and writes `error_scan.csv` (errors per N and
/// method), `error_scan_curves.csv` and `manifest.json`.
pub fn write_error_scan(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    dir: &Path,
) -> Result<ErrorScanResult> {
    let started = Instant::now();
    let res = run_error_scan(cfg, opts)?;
    fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("error_scan.csv"))?;
    w.write_record(["n", "method", "mean_percentage_error", "rule_of_thumb"])?;
    for e in &res.errors {
        let rule = res
            .rule_of_thumb
            .iter()
            .find(|(n, _)| *n == e.n)
            .map(|(_, r)| *r);
        let rule = match rule {
            Some(OptimalMethod::MWise) => "m-wise",
            Some(OptimalMethod::Pairwise) => "pairwise",
            Some(OptimalMethod::Tie) => "tie",
            None => "",
        };
        w.write_record([
            e.n.to_string(),
            e.method.as_str().to_string(),
            e.mean_percentage_error.to_string(),
            rule.to_string(),
        ])?;
    }
    w.flush()?;
    let mut w = csv_writer(&dir.join("error_scan_curves.csv"))?;
    w.write_record(["n", "d_over_lambda", "method", "value", "std_error"])?;
    for p in &res.curves {
        w.write_record([
            p.n.to_string(),
            p.d_over_lambda.to_string(),
            p.method.as_str().to_string(),
            p.value.to_string(),
            p.std_error.to_string(),
        ])?;
    }
    w.flush()?;
    #[derive(Serialize)]
    struct ScanTimings<'a> {
        per_n_ms: &'a [(usize, f64)],
        crossover_uncorrected: Option<usize>,
        crossover_corrected: Option<usize>,
    }
    let eff = opts.effective(cfg);
    let outputs = vec!["error_scan.csv".into(), "error_scan_curves.csv".into()];
    let t = ScanTimings {
        per_n_ms: &res.timings,
        crossover_uncorrected: res.crossover_uncorrected,
        crossover_corrected: res.crossover_corrected,
    };
    write_manifest(
        dir,
        "error-scan",
        &eff,
        opts,
        &res.fingerprint,
        outputs,
        t,
        started,
    )?;
    Ok(res)
}

/// Runs emission traces and writes `emission.csv` and `manifest.json`.
pub fn write_emission(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    dir: &Path,
) -> Result<EmissionResult> {
    let started = Instant::now();
    let res = run_emission_trace(cfg, opts)?;
    fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("emission.csv"))?;
    w.write_record(["d_over_lambda", "time", "series", "m", "value"])?;
    for p in &res.points {
        w.write_record([
            p.d_over_lambda.to_string(),
            p.time.to_string(),
            p.series.to_string(),
            opt_str(p.m),
            p.value.to_string(),
        ])?;
    }
    w.flush()?;
    let eff = opts.effective(cfg);
    write_manifest(
        dir,
        "emission",
        &eff,
        opts,
        &res.fingerprint,
        vec!["emission.csv".into()],
        (),
        started,
    )?;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(methods: &str) -> ScenarioConfig {
        ScenarioConfig::from_json(&format!(
            r#"{{
                "array": {{"kind": "chain", "n": 5}},
                "protocol": "inverted-free-decay",
                "sweep": {{"values": [0.0, 0.3, 0.8]}},
                "sampling": {{"m": 3, "samples_pairwise": 50, "samples_mwise": 20}},
                "methods": {methods},
                "seed": 3
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn sweep_rows_follow_methods() {
        let cfg = config(r#"["exact", "closed-form", "pairwise-corr", "m-wise"]"#);
        let res = run_sweep(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(res.rows.len(), 12);
        assert!(res.rows.iter().all(|r| cfg.methods.contains(&r.method)));
        for pair in res.rows.chunks(4) {
            assert!((pair[0].value - pair[1].value).abs() < 1e-12);
        }
        assert_eq!(res.fingerprint, fingerprint(&cfg));
    }

    #[test]
    fn seed_override_changes_fingerprint() {
        let cfg = config(r#"["m-wise"]"#);
        let a = run_sweep(&cfg, &RunOptions::default()).unwrap();
        let opts = RunOptions {
            seed: Some(99),
            ..RunOptions::default()
        };
        let b = run_sweep(&cfg, &opts).unwrap();
        assert_ne!(a.fingerprint, b.fingerprint);
        assert_eq!(
            run_sweep(&cfg, &RunOptions::default()).unwrap().rows,
            a.rows
        );
    }

    #[test]
    fn exact_beyond_capacity_is_rejected() {
        let mut cfg = config(r#"["exact"]"#);
        cfg.array = crate::scenario::ArraySpec::Chain {
            n: 13,
            axis: [1.0, 0.0, 0.0],
            dipole: [0.0, 0.0, 1.0],
        };
        let err = run_sweep(&cfg, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, crate::Error::Capacity { .. }));
    }

    #[test]
    fn small_error_scan() {
        let mut cfg = config(r#"["exact"]"#);
        cfg.error_scan = Some(crate::scenario::ErrorScanSettings { n_min: 3, n_max: 5 });
        let res = run_error_scan(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(res.errors.len(), 3 * 4);
        // N ≤ m: m-wise is exhaustive at m = N
        assert!(res.error(3, MethodKind::MWise).unwrap() < 1e-10);
        assert!(res.error(5, MethodKind::MWise).unwrap() > 0.0);
    }
}
