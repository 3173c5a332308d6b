//! Monte-Carlo subsampling estimators for large arrays.
//!
//! Each sample restricts the scenario to a random subset of emitters, solves
//! that small register exactly with only the mutual couplings inside the
//! subset, and produces one normalized correlation value. Estimates average
//! these per-sample ratios.
//!
//! Sample `i` draws its subset from a ChaCha8 stream seeded with the run seed
//! and stream number `i`, so results do not depend on how samples are
//! scheduled across threads.

use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::emission_rate;
use crate::error::{validation, Error, Result};
use crate::quantum::{build_liouvillian_with, evolve, DensityState, EvolveOptions};
use crate::scenario::{Protocol, Scenario, TraceNormalization};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pairwise,
    MWise,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pairwise => "pairwise",
            Method::MWise => "m-wise",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub method: Method,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub apply_offset: bool,
}

impl SamplingConfig {
    pub fn pairwise(samples: usize, seed: u64) -> Self {
        SamplingConfig {
            method: Method::Pairwise,
            m: 2,
            samples,
            seed,
            apply_offset: false,
        }
    }

    pub fn mwise(m: usize, samples: usize, seed: u64) -> Self {
        SamplingConfig {
            method: Method::MWise,
            m,
            samples,
            seed,
            apply_offset: false,
        }
    }

    pub fn with_offset(mut self, apply: bool) -> Self {
        self.apply_offset = apply;
        self
    }

    /// Checks the configuration against a target array of `n` emitters.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        let n = scenario.len();
        if self.method == Method::Pairwise && self.m != 2 {
            return Err(validation("pairwise sampling uses m = 2"));
        }
        if self.m < 2 || self.m >= n {
            return Err(validation(format!(
                "sample size m = {} must satisfy 2 <= m < N = {n}",
                self.m
            )));
        }
        if self.samples == 0 {
            return Err(validation("sample count must be positive"));
        }
        if scenario.protocol == Protocol::DrivenSteadyState {
            scenario.capacity.check_steady_state(self.m)
        } else {
            scenario.capacity.check_evolution(self.m)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub per_sample_values: Vec<f64>,
    /// Emitter indices of each sample, sorted.
    pub subsets: Vec<Vec<usize>>,
    pub method: Method,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    /// Size of the full array the offsets refer to.
    pub n_total: usize,
    pub offset_applied: f64,
}

impl SamplingEstimate {
    fn from_values(
        values: Vec<f64>,
        subsets: Vec<Vec<usize>>,
        method: Method,
        m: usize,
        seed: u64,
        n_total: usize,
    ) -> Self {
        let (mean, std) = mean_std(&values);
        let s = values.len();
        SamplingEstimate {
            mean,
            std_error: std / (s as f64).sqrt(),
            samples: s,
            per_sample_values: values,
            subsets,
            method,
            m,
            seed,
            n_total,
            offset_applied: 0.0,
        }
    }

    /// Standard deviation of the per-sample values (n − 1
    /// denominator).
    pub fn sample_std(&self) -> f64 {
        mean_std(&self.per_sample_values).1
    }

    /// Writes `sample_index,indices,value` rows; indices are space separated.
    pub fn write_samples_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["sample_index", "indices", "value"])?;
        for (i, (idx, v)) in self.subsets.iter().zip(&self.per_sample_values).enumerate() {
            let idx: Vec<String> = idx.iter().map(|x| x.to_string()).collect();
            out.write_record([i.to_string(), idx.join(" "), format!("{v:.17e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Mean and n − 1 standard deviation, summed in index order.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// RNG stream for sample `sample_index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    rng
}

/// Uniform random `m`-subset of `0..n`, sorted.
pub fn draw_sample(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if m < 2 || m >= n {
        return Err(validation(format!(
            "cannot draw {m} of {n} emitters (need 2 <= m < N)"
        )));
    }
    let mut idx = index::sample(rng, n, m).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Evaluates `per_subset` on every subset in parallel, collecting in order;
/// the lowest-index failure is reported.
fn run_samples<F>(
    scenario: &Scenario,
    subsets: Vec<Vec<usize>>,
    per_subset: F,
) -> Result<(Vec<f64>, Vec<Vec<usize>>)>
where
    F: Fn(&Scenario) -> Result<f64> + Sync,
{
    let results: Vec<Result<f64>> = subsets
        .par_iter()
        .map(|idx| scenario.restrict(idx).and_then(|s| per_subset(&s)))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                return Err(Error::Sample {
                    sample: i,
                    indices: subsets[i].clone(),
                    source: Box::new(e),
                })
            }
        }
    }
    Ok((values, subsets))
}

fn draw_all(n: usize, cfg: &SamplingConfig) -> Result<Vec<Vec<usize>>> {
    (0..cfg.samples)
        .map(|i| draw_sample(n, cfg.m, &mut sample_rng(cfg.seed, i as u64)))
        .collect()
}

fn finish(
    scenario: &Scenario,
    cfg: &SamplingConfig,
    values: Vec<f64>,
    subsets: Vec<Vec<usize>>,
) -> Result<SamplingEstimate> {
    let raw =
        SamplingEstimate::from_values(values, subsets, cfg.method, cfg.m, cfg.seed, scenario.len());
    if cfg.apply_offset {
        apply_offset(&raw, scenario.len())
    } else {
        Ok(raw)
    }
}

/// m-wise estimator: full correlation on each random m-subset.
pub fn mwise_estimate(scenario: &Scenario, cfg: &SamplingConfig) -> Result<SamplingEstimate> {
    if cfg.method != Method::MWise {
        return Err(validation("mwise_estimate needs an m-wise configuration"));
    }
    cfg.check(scenario)?;
    let subsets = draw_all(scenario.len(), cfg)?;
    let (values, subsets) = run_samples(scenario, subsets, |s| Ok(s.evaluate()?.value))?;
    finish(scenario, cfg, values, subsets)
}

/// Pairwise estimator: cross-term correlation on each random pair.
pub fn pairwise_estimate(scenario: &Scenario, cfg: &SamplingConfig) -> Result<SamplingEstimate> {
    if cfg.method != Method::Pairwise {
        return Err(validation(
            "pairwise_estimate needs a pairwise configuration",
        ));
    }
    cfg.check(scenario)?;
    let subsets = draw_all(scenario.len(), cfg)?;
    let (values, subsets) =
        run_samples(scenario, subsets, |s| Ok(s.evaluate_cross_terms()?.value))?;
    finish(scenario, cfg, values, subsets)
}

pub fn estimate(scenario: &Scenario, cfg: &SamplingConfig) -> Result<SamplingEstimate> {
    match cfg.method {
        Method::Pairwise => pairwise_estimate(scenario, cfg),
        Method::MWise => mwise_estimate(scenario, cfg),
    }
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn all_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..m).rev().find(|&i| cur[i] < n - m + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..m {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// m-wise mean over every `m`-subset with equal weight; `m = N` is allowed
/// and reduces to the exact value. `seed` is recorded as 0.
pub fn mwise_exhaustive(scenario: &Scenario, m: usize) -> Result<SamplingEstimate> {
    let n = scenario.len();
    if m < 2 || m > n {
        return Err(validation(format!(
            "exhaustive m-wise needs 2 <= m <= N = {n}, got {m}"
        )));
    }
    let (values, subsets) = run_samples(scenario, all_subsets(n, m), |s| Ok(s.evaluate()?.value))?;
    Ok(SamplingEstimate::from_values(
        values,
        subsets,
        Method::MWise,
        m,
        0,
        n,
    ))
}

/// The constant each method's offset correction adds for an array of `n`.
pub fn offset_for(method: Method, m: usize, n: usize) -> f64 {
    match method {
        Method::Pairwise => -1.0 / n as f64,
        Method::MWise => 1.0 / m as f64 - 1.0 / n as f64,
    }
}

/// Shifts the mean by the method's offset; std_error is unchanged.
pub fn apply_offset(raw: &SamplingEstimate, n: usize) -> Result<SamplingEstimate> {
    if raw.offset_applied != 0.0 {
        return Err(Error::OffsetAlreadyApplied(raw.offset_applied));
    }
    if n < 2 {
        return Err(validation("offsets need N >= 2"));
    }
    let off = offset_for(raw.method, raw.m, n);
    let raw_mean = raw.per_sample_values.iter().sum::<f64>() / raw.per_sample_values.len() as f64;
    Ok(SamplingEstimate {
        mean: raw_mean + off,
        offset_applied: off,
        n_total: n,
        ..raw.clone()
    })
}

/// `(100/n) Σ |exact_i − approx_i| / |exact_i|`.
pub fn mean_percentage_error(exact: &[f64], approx: &[f64]) -> Result<f64> {
    if exact.len() != approx.len() || exact.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "curves have {} and {} points",
            exact.len(),
            approx.len()
        )));
    }
    if exact.contains(&0.0) {
        return Err(validation("exact curve has a zero value"));
    }
    let sum: f64 = exact
        .iter()
        .zip(approx)
        .map(|(e, a)| ((e - a) / e).abs())
        .sum();
    Ok(100.0 * sum / exact.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimalMethod {
    MWise,
    Pairwise,
    /// N = 2m, where both estimators are expected to perform alike.
    Tie,
}

/// Rule of thumb: m-wise for N < 2m, pairwise for N > 2m.
pub fn optimal_method(n: usize, m: usize) -> OptimalMethod {
    match n.cmp(&(2 * m)) {
        std::cmp::Ordering::Less => OptimalMethod::MWise,
        std::cmp::Ordering::Greater => OptimalMethod::Pairwise,
        std::cmp::Ordering::Equal => OptimalMethod::Tie,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over the data range; the last bin is closed.
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 || values.is_empty() {
            return Err(validation("histogram needs data and at least one bin"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi == lo {
            hi = lo + 1e-12_f64.max(lo.abs() * 1e-12);
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for v in values {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Ok(Histogram { edges, counts })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDistribution {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
    pub estimate: SamplingEstimate,
}

/// Per-sample value statistics of an estimator run.
pub fn sample_distribution(
    scenario: &Scenario,
    cfg: &SamplingConfig,
    bins: usize,
) -> Result<SampleDistribution> {
    let est = estimate(scenario, &cfg.with_offset(false))?;
    let v = &est.per_sample_values;
    let (mean, std) = mean_std(v);
    Ok(SampleDistribution {
        mean,
        std,
        min: v.iter().copied().fold(f64::INFINITY, f64::min),
        max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        histogram: Histogram::new(v, bins)?,
        estimate: est,
    })
}

/// Normalized emission rate `R(t)/R(0)` of an undriven register decaying
/// from full inversion.
pub fn emission_trace(scenario: &Scenario, times: &[f64]) -> Result<Vec<f64>> {
    let rates = emission_rates(scenario, times)?;
    let r0 = scenario_r0(scenario)?;
    Ok(rates.into_iter().map(|r| r / r0).collect())
}

fn scenario_r0(scenario: &Scenario) -> Result<f64> {
    let g = crate::em_env::coupling_matrices(&scenario.array)?.gamma;
    emission_rate(&DensityState::inverted(scenario.len()), &g)
}

fn emission_rates(scenario: &Scenario, times: &[f64]) -> Result<Vec<f64>> {
    if scenario.protocol != Protocol::InvertedFreeDecay {
        return Err(validation(
            "emission traces use the inverted-free-decay protocol",
        ));
    }
    let couplings = crate::em_env::coupling_matrices(&scenario.array)?;
    let l = build_liouvillian_with(&couplings, None, &scenario.array, &scenario.capacity)?;
    let opts = EvolveOptions {
        capacity: scenario.capacity,
        ..EvolveOptions::default()
    };
    evolve(&DensityState::inverted(scenario.len()), &l, times, &opts)?
        .iter()
        .map(|rho| emission_rate(rho, &couplings.gamma))
        .collect()
}

/// m-wise sampled emission trace, normalized by the full array's `R(0)`.
pub fn mwise_emission_trace(
    scenario: &Scenario,
    times: &[f64],
    m: usize,
    samples: usize,
    seed: u64,
    normalization: TraceNormalization,
) -> Result<Vec<f64>> {
    let cfg = SamplingConfig::mwise(m, samples, seed);
    cfg.check(scenario)?;
    let subsets = draw_all(scenario.len(), &cfg)?;
    let traces: Vec<Result<Vec<f64>>> = subsets
        .par_iter()
        .map(|idx| {
            let sub = scenario.restrict(idx)?;
            let rates = emission_rates(&sub, times)?;
            Ok(match normalization {
                TraceNormalization::PerSample => {
                    let r0 = scenario_r0(&sub)?;
                    rates.into_iter().map(|r| r / r0).collect()
                }
                TraceNormalization::Rescaled => rates,
            })
        })
        .collect();
    let mut sum = vec![0.0; times.len()];
    for (i, t) in traces.into_iter().enumerate() {
        let t = t.map_err(|e| Error::Sample {
            sample: i,
            indices: subsets[i].clone(),
            source: Box::new(e),
        })?;
        for (s, v) in sum.iter_mut().zip(t) {
            *s += v;
        }
    }
    let mean = sum.into_iter().map(|s| s / samples as f64);
    Ok(match normalization {
        TraceNormalization::PerSample => mean.collect(),
        TraceNormalization::Rescaled => {
            let scale = scenario.len() as f64 / m as f64 / scenario_r0(scenario)?;
            mean.map(|r| r * scale).collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::dicke_value;
    use crate::geometry::{build_chain, build_square_lattice, EmitterArray};

    fn chain(n: usize, d: f64) -> Scenario {
        Scenario::inverted(build_chain(n, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap())
    }

    #[test]
    fn draws_are_uniform_and_reproducible() {
        let mut counts = [0usize; 3];
        for i in 0..30_000 {
            let s = draw_sample(3, 2, &mut sample_rng(11, i)).unwrap();
            let k = match (s[0], s[1]) {
                (0, 1) => 0,
                (0, 2) => 1,
                _ => 2,
            };
            counts[k] += 1;
        }
        let sigma = (30_000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 3.0 * sigma, "{counts:?}");
        }
        assert_eq!(
            draw_sample(20, 5, &mut sample_rng(3, 9)).unwrap(),
            draw_sample(20, 5, &mut sample_rng(3, 9)).unwrap()
        );
        assert!(draw_sample(5, 5, &mut sample_rng(0, 0)).is_err());
    }

    #[test]
    fn subsets_enumerate_binomially() {
        let all = all_subsets(6, 3);
        assert_eq!(all.len(), 20);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[19], vec![3, 4, 5]);
        assert_eq!(all_subsets(4, 4), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn dicke_limits() {
        let s = Scenario::inverted(EmitterArray::coincident(10, [0.0, 0.0, 1.0]).unwrap());
        let pw = pairwise_estimate(&s, &SamplingConfig::pairwise(50, 1)).unwrap();
        assert!(pw
            .per_sample_values
            .iter()
            .all(|&v| (v - 2.0).abs() < 1e-12));
        let mw = mwise_estimate(&s, &SamplingConfig::mwise(4, 20, 1)).unwrap();
        assert!(mw
            .per_sample_values
            .iter()
            .all(|&v| (v - dicke_value(4)).abs() < 1e-12));
        assert!(mw.std_error < 1e-12);
    }

    #[test]
    fn m2_inverted_never_exceeds_one() {
        // a pair gives (1 + γ₁₂²)/2, equal to 1 only for coincident emitters
        let s = chain(7, 0.2);
        let est = mwise_estimate(&s, &SamplingConfig::mwise(2, 40, 5)).unwrap();
        let gamma = crate::em_env::coupling_matrices(&s.array).unwrap().gamma;
        for (v, idx) in est.per_sample_values.iter().zip(&est.subsets) {
            let g = gamma[(idx[0], idx[1])];
            assert!((v - (1.0 + g * g) / 2.0).abs() < 1e-12);
            assert!(*v <= 1.0);
        }
        let dicke = Scenario::inverted(EmitterArray::coincident(7, [0.0, 0.0, 1.0]).unwrap());
        let est = mwise_estimate(&dicke, &SamplingConfig::mwise(2, 10, 5)).unwrap();
        assert!(est
            .per_sample_values
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn exhaustive_full_subset_is_exact() {
        let s = chain(5, 0.3);
        let ex = mwise_exhaustive(&s, 5).unwrap();
        assert_eq!(ex.samples, 1);
        assert!((ex.mean - s.evaluate().unwrap().value).abs() < 1e-12);
        assert_eq!(mwise_exhaustive(&s, 3).unwrap().samples, 10);
    }

    #[test]
    fn offsets() {
        let raw = SamplingEstimate::from_values(
            vec![0.8, 0.8],
            vec![vec![0], vec![1]],
            Method::MWise,
            6,
            0,
            64,
        );
        let c = apply_offset(&raw, 64).unwrap();
        assert!((c.mean - 0.951_041_666_666_666_6).abs() < 1e-15);
        assert_eq!(c.std_error, raw.std_error);
        assert!(matches!(
            apply_offset(&c, 64),
            Err(Error::OffsetAlreadyApplied(_))
        ));
        let pw =
            SamplingEstimate::from_values(vec![1.0], vec![vec![0, 1]], Method::Pairwise, 2, 0, 64);
        assert_eq!(apply_offset(&pw, 64).unwrap().mean, 0.984375);
    }

    #[test]
    fn percentage_error() {
        let e = [1.0, 2.0, 0.5];
        assert_eq!(mean_percentage_error(&e, &e).unwrap(), 0.0);
        let a: Vec<f64> = e.iter().map(|x| 1.1 * x).collect();
        assert!((mean_percentage_error(&e, &a).unwrap() - 10.0).abs() < 1e-12);
        assert!(mean_percentage_error(&e, &a[..2]).is_err());
        assert!(mean_percentage_error(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn optimal_rule() {
        assert_eq!(optimal_method(8, 6), OptimalMethod::MWise);
        assert_eq!(optimal_method(64, 6), OptimalMethod::Pairwise);
        assert_eq!(optimal_method(12, 6), OptimalMethod::Tie);
    }

    #[test]
    fn pairwise_label_invariance() {
        let lat = Scenario::inverted(build_square_lattice(4, 0.27, [0.0, 0.0, 1.0]).unwrap());
        // (0,1) and (10,11) are both nearest neighbours along x
        let a = lat
            .restrict(&[0, 1])
            .unwrap()
            .evaluate_cross_terms()
            .unwrap()
            .value;
        let b = lat
            .restrict(&[10, 11])
            .unwrap()
            .evaluate_cross_terms()
            .unwrap()
            .value;
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn sample_failure_reports_indices() {
        let mut s = chain(6, 0.3);
        s.capacity.evolution = 2;
        let err = mwise_estimate(&s, &SamplingConfig::mwise(3, 4, 0)).unwrap_err();
        assert!(matches!(err, Error::Validation(_) | Error::Capacity { .. }));
        // an undefined correlation surfaces with its subset
        let drive = crate::geometry::DriveParams::resonant(0.0).unwrap();
        let arr = build_chain(4, 0.3, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let ground = Scenario::driven_transient(arr, drive, 1.0);
        match pairwise_estimate(&ground, &SamplingConfig::pairwise(3, 0)).unwrap_err() {
            Error::Sample {
                sample, indices, ..
            } => {
                assert_eq!(sample, 0);
                assert_eq!(indices.len(), 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn distribution_of_dicke_is_degenerate() {
        let s = Scenario::inverted(EmitterArray::coincident(8, [0.0, 0.0, 1.0]).unwrap());
        let d = sample_distribution(&s, &SamplingConfig::mwise(3, 30, 2), 5).unwrap();
        assert!(d.std < 1e-12);
        assert_eq!(d.histogram.counts.iter().sum::<usize>(), 30);
    }

    #[test]
    fn trace_normalizations_agree_for_inverted_start() {
        let s = chain(5, 0.15);
        let t = [0.0, 0.2, 0.5];
        let a = mwise_emission_trace(&s, &t, 3, 8, 4, TraceNormalization::PerSample).unwrap();
        let b = mwise_emission_trace(&s, &t, 3, 8, 4, TraceNormalization::Rescaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a[0] - 1.0).abs() < 1e-12);
        assert!((emission_trace(&s, &t).unwrap()[0] - 1.0).abs() < 1e-12);
    }
}
