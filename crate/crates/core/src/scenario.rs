//! Scenario files and the physical setups they describe.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::correlations::{
    a2_cross_terms, a2_zero_delay, inverted_closed_form, CorrelationResult, TimePoint,
};
use crate::em_env::{coeff_matrices, coupling_matrices, CoeffMatrix, CouplingMatrices, Flavor};
use crate::error::{validation, Error, Result};
use crate::geometry::{
    build_chain, build_square_lattice, validate, DetectorConfig, DriveParams, EmitterArray, Vec3,
    DEFAULT_EPS_MIN,
};
use crate::quantum::{
    build_liouvillian_with, evolve, steady_state_with, Capacity, DensityState, EvolveOptions,
    Liouvillian, SteadyStateOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Undriven decay from the fully inverted state.
    InvertedFreeDecay,
    /// Stationary state under the coherent drive.
    DrivenSteadyState,
    /// Driven evolution to a finite time.
    DrivenTransient,
}

impl Protocol {
    pub fn is_driven(self) -> bool {
        !matches!(self, Protocol::InvertedFreeDecay)
    }
}

/// Register state at t = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Ground,
    Inverted,
}

/// One fully specified physical setup at a single geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub array: EmitterArray,
    pub drive: Option<DriveParams>,
    pub protocol: Protocol,
    pub time: TimePoint,
    pub initial: InitialState,
    pub flavor: Flavor,
    pub detector: Option<DetectorConfig>,
    pub capacity: Capacity,
}

/// Couplings, coefficient matrices and state of a prepared scenario.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub couplings: CouplingMatrices,
    pub coeff_a: CoeffMatrix,
    pub coeff_b: CoeffMatrix,
    pub state: DensityState,
}

impl Scenario {
    /// Undriven, fully inverted array evaluated at t = 0 with the total flavor.
    pub fn inverted(array: EmitterArray) -> Self {
        Scenario {
            array,
            drive: None,
            protocol: Protocol::InvertedFreeDecay,
            time: TimePoint::At(0.0),
            initial: InitialState::Inverted,
            flavor: Flavor::Total,
            detector: None,
            capacity: Capacity::default(),
        }
    }

    /// Undriven decay from full inversion to time `t`.
    pub fn free_decay(array: EmitterArray, t: f64) -> Self {
        Scenario {
            time: TimePoint::At(t),
            ..Scenario::inverted(array)
        }
    }

    pub fn driven_steady_state(array: EmitterArray, drive: DriveParams) -> Self {
        Scenario {
            drive: Some(drive),
            protocol: Protocol::DrivenSteadyState,
            time: TimePoint::Steady,
            initial: InitialState::Ground,
            ..Scenario::inverted(array)
        }
    }

    /// Drive switched on at t = 0 with the register in its ground state.
    pub fn driven_transient(array: EmitterArray, drive: DriveParams, t: f64) -> Self {
        Scenario {
            drive: Some(drive),
            protocol: Protocol::DrivenTransient,
            time: TimePoint::At(t),
            initial: InitialState::Ground,
            ..Scenario::inverted(array)
        }
    }

    pub fn with_flavor(mut self, flavor: Flavor, detector: Option<DetectorConfig>) -> Self {
        self.flavor = flavor;
        self.detector = detector;
        self
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_capacity(mut self, capacity: Capacity) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn len(&self) -> usize {
        self.array.len()
    }

    pub fn is_empty(&self) -> bool {
        self.array.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        if self.flavor.needs_detector() && self.detector.is_none() {
            return Err(validation(format!(
                "flavor '{}' requires a detector configuration",
                self.flavor.as_str()
            )));
        }
        match (self.protocol, &self.drive, self.time) {
            (Protocol::InvertedFreeDecay, Some(d), _) if d.rabi() != 0.0 => {
                Err(validation("inverted-free-decay does not take a drive"))
            }
            (Protocol::InvertedFreeDecay, _, TimePoint::Steady) => Err(validation(
                "inverted-free-decay needs a finite time (its stationary state is the ground state)",
            )),
            (Protocol::DrivenSteadyState | Protocol::DrivenTransient, None, _) => Err(validation(format!(
                "protocol {:?} requires drive parameters",
                self.protocol
            ))),
            (Protocol::DrivenTransient, _, TimePoint::Steady) => {
                Err(validation("driven-transient needs a finite time"))
            }
            _ => Ok(()),
        }?;
        if self.protocol == Protocol::InvertedFreeDecay && self.initial != InitialState::Inverted {
            return Err(validation(
                "inverted-free-decay starts from the inverted state",
            ));
        }
        validate(&self.array, DEFAULT_EPS_MIN).into_result()
    }

    /// True when the state is the fully inverted one, so closed forms apply.
    pub fn is_inverted_at_zero(&self) -> bool {
        self.protocol == Protocol::InvertedFreeDecay && self.time == TimePoint::At(0.0)
    }

    /// The same scenario on the emitters in `indices`.
    pub fn restrict(&self, indices: &[usize]) -> Result<Scenario> {
        Ok(Scenario {
            array: self.array.subset(indices)?,
            ..self.clone()
        })
    }

    /// Builds couplings and coefficient matrices and prepares the register
    /// state the protocol asks for.
    pub fn prepare(&self) -> Result<Prepared> {
        self.check()?;
        let couplings = coupling_matrices(&self.array)?;
        let (coeff_a, coeff_b) =
            coeff_matrices(&self.array, &couplings, self.flavor, self.detector.as_ref())?;
        let state = self.prepare_state(&couplings)?;
        Ok(Prepared {
            couplings,
            coeff_a,
            coeff_b,
            state,
        })
    }

    fn liouvillian(&self, couplings: &CouplingMatrices) -> Result<Liouvillian> {
        let drive = if self.protocol.is_driven() {
            self.drive.as_ref()
        } else {
            None
        };
        build_liouvillian_with(couplings, drive, &self.array, &self.capacity)
    }

    pub fn prepare_state(&self, couplings: &CouplingMatrices) -> Result<DensityState> {
        let n = self.len();
        let start = match self.initial {
            InitialState::Ground => DensityState::ground(n),
            InitialState::Inverted => DensityState::inverted(n),
        };
        match (self.protocol, self.time) {
            (Protocol::InvertedFreeDecay, TimePoint::At(0.0)) => {
                self.capacity.check_evolution(n)?;
                Ok(start)
            }
            (Protocol::DrivenSteadyState, _) => {
                self.capacity.check_steady_state(n)?;
                let l = self.liouvillian(couplings)?;
                let opts = SteadyStateOptions {
                    capacity: self.capacity,
                    ..SteadyStateOptions::default()
                };
                steady_state_with(&l, &opts)
            }
            (_, TimePoint::At(t)) => {
                let l = self.liouvillian(couplings)?;
                let opts = EvolveOptions {
                    capacity: self.capacity,
                    ..EvolveOptions::default()
                };
                Ok(evolve(&start, &l, &[t], &opts)?.pop().expect("one output"))
            }
            (_, TimePoint::Steady) => Err(validation("protocol has no stationary evaluation")),
        }
    }

    /// Exact normalized correlation with all terms kept.
    pub fn evaluate(&self) -> Result<CorrelationResult> {
        let p = self.prepare()?;
        Ok(a2_zero_delay(&p.state, &p.coeff_a, &p.coeff_b)?.at(self.time))
    }

    /// Exact correlation with same-emitter terms dropped from the
    /// denominator (the per-pair quantity of the pairwise estimator).
    pub fn evaluate_cross_terms(&self) -> Result<CorrelationResult> {
        let p = self.prepare()?;
        Ok(a2_cross_terms(&p.state, &p.coeff_a, &p.coeff_b)?.at(self.time))
    }

    /// Operator-free value for an inverted array at t = 0.
    pub fn closed_form(&self) -> Result<f64> {
        if !self.is_inverted_at_zero() {
            return Err(Error::Precondition(
                "the closed form applies only to the inverted array at t = 0".into(),
            ));
        }
        self.check()?;
        let couplings = coupling_matrices(&self.array)?;
        let (a, b) = coeff_matrices(&self.array, &couplings, self.flavor, self.detector.as_ref())?;
        inverted_closed_form(&a, &b)
    }
}

/// Emitter layout of a scenario file; the sweep variable `d` scales it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArraySpec {
    Chain {
        n: usize,
        #[serde(default = "x_axis")]
        axis: Vec3,
        #[serde(default = "z_axis")]
        dipole: Vec3,
    },
    SquareLattice {
        side: usize,
        #[serde(default = "z_axis")]
        dipole: Vec3,
    },
    /// Positions in units of `d`.
    Explicit {
        positions: Vec<Vec3>,
        dipoles: Vec<Vec3>,
    },
}

fn x_axis() -> Vec3 {
    [1.0, 0.0, 0.0]
}

fn z_axis() -> Vec3 {
    [0.0, 0.0, 1.0]
}

impl ArraySpec {
    pub fn count(&self) -> usize {
        match self {
            ArraySpec::Chain { n, .. } => *n,
            ArraySpec::SquareLattice { side, .. } => side * side,
            ArraySpec::Explicit { positions, .. } => positions.len(),
        }
    }

    /// The array at separation `d`; `d = 0` gives the coincident (Dicke)
    /// array.
    pub fn build(&self, d: f64) -> Result<EmitterArray> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(validation(format!("separation must be >= 0, got {d}")));
        }
        if d == 0.0 {
            let dipoles = match self {
                ArraySpec::Chain { n, dipole, .. } => vec![*dipole; *n],
                ArraySpec::SquareLattice { side, dipole } => vec![*dipole; side * side],
                ArraySpec::Explicit { dipoles, .. } => dipoles.clone(),
            };
            let n = dipoles.len();
            return Ok(EmitterArray::new(vec![[0.0; 3]; n], dipoles)?.with_coincident(true));
        }
        match self {
            ArraySpec::Chain { n, axis, dipole } => build_chain(*n, d, *axis, *dipole),
            ArraySpec::SquareLattice { side, dipole } => build_square_lattice(*side, d, *dipole),
            ArraySpec::Explicit { positions, dipoles } => EmitterArray::new(
                positions
                    .iter()
                    .map(|p| [p[0] * d, p[1] * d, p[2] * d])
                    .collect(),
                dipoles.clone(),
            ),
        }
    }

    /// A chain of a different length, for scans over N.
    pub fn with_count(&self, n: usize) -> Result<ArraySpec> {
        match self {
            ArraySpec::Chain { axis, dipole, .. } => Ok(ArraySpec::Chain {
                n,
                axis: *axis,
                dipole: *dipole,
            }),
            _ => Err(validation("scans over N need a chain array")),
        }
    }
}

/// A grid of real values: an explicit list or `points` evenly spaced values
/// from `start` to `stop` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Grid {
    Values {
        values: Vec<f64>,
    },
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values { values } => values.clone(),
            Grid::Range {
                start,
                stop,
                points,
            } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                p => (0..*p)
                    .map(|i| start + (stop - start) * i as f64 / (p - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Exact,
    ClosedForm,
    Pairwise,
    PairwiseCorr,
    MWise,
    MWiseCorr,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Exact => "exact",
            MethodKind::ClosedForm => "closed-form",
            MethodKind::Pairwise => "pairwise",
            MethodKind::PairwiseCorr => "pairwise-corr",
            MethodKind::MWise => "m-wise",
            MethodKind::MWiseCorr => "m-wise-corr",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSettings {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_s2")]
    pub samples_pairwise: usize,
    #[serde(default = "default_sm")]
    pub samples_mwise: usize,
}

fn default_m() -> usize {
    6
}

fn default_s2() -> usize {
    10_000
}

fn default_sm() -> usize {
    2_000
}

impl Default for SamplingSettings {
    fn default() -> Self {
        SamplingSettings {
            m: default_m(),
            samples_pairwise: default_s2(),
            samples_mwise: default_sm(),
        }
    }
}

/// Chain lengths for an error scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorScanSettings {
    pub n_min: usize,
    pub n_max: usize,
}

/// How sampled emission traces are normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceNormalization {
    /// Mean over samples of `R_s(t) / R_s(0)`.
    #[default]
    PerSample,
    /// `(N/m) · mean_s R_s(t)`, divided by the full array's `R(0)`.
    Rescaled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionSettings {
    pub times: Grid,
    pub m_values: Vec<usize>,
    pub samples: usize,
    #[serde(default)]
    pub normalization: TraceNormalization,
}

/// Contents of a scenario JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub array: ArraySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveParams>,
    pub protocol: Protocol,
    /// Evaluation time; defaults to `"steady"` for driven-steady-state and
    /// to 0 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub flavor: Flavor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorConfig>,
    pub sweep: Grid,
    #[serde(default)]
    pub sampling: SamplingSettings,
    pub methods: Vec<MethodKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_scan: Option<ErrorScanSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission: Option<EmissionSettings>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| validation(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn time(&self) -> TimePoint {
        self.time.unwrap_or(match self.protocol {
            Protocol::DrivenSteadyState => TimePoint::Steady,
            _ => TimePoint::At(0.0),
        })
    }

    pub fn initial(&self) -> InitialState {
        self.initial.unwrap_or(match self.protocol {
            Protocol::InvertedFreeDecay => InitialState::Inverted,
            _ => InitialState::Ground,
        })
    }

    pub fn check(&self) -> Result<()> {
        if self.array.count() == 0 {
            return Err(validation("the array needs at least one emitter"));
        }
        if self.methods.is_empty() {
            return Err(validation("no methods requested"));
        }
        let unique: BTreeSet<_> = self.methods.iter().collect();
        if unique.len() != self.methods.len() {
            return Err(validation("methods are listed more than once"));
        }
        let d = self.sweep.points();
        if d.is_empty() {
            return Err(validation("the sweep grid is empty"));
        }
        if let Some(bad) = d.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(validation(format!(
                "sweep value {bad} is not a separation >= 0"
            )));
        }
        if self.sampling.m < 2 {
            return Err(validation("m-wise sample size m must be >= 2"));
        }
        if self.sampling.samples_pairwise == 0 || self.sampling.samples_mwise == 0 {
            return Err(validation("sample counts must be positive"));
        }
        if let Some(scan) = &self.error_scan {
            if scan.n_min < 2 || scan.n_max < scan.n_min {
                return Err(validation("error scan needs 2 <= n_min <= n_max"));
            }
            self.array.with_count(scan.n_min)?;
        }
        if let Some(em) = &self.emission {
            if em.m_values.iter().any(|&m| m < 2) || em.samples == 0 {
                return Err(validation("emission traces need m >= 2 and samples > 0"));
            }
            let t = em.times.points();
            if t.is_empty() || t.windows(2).any(|w| w[1] < w[0]) || t[0] < 0.0 {
                return Err(validation(
                    "emission times must be a non-empty increasing grid from t >= 0",
                ));
            }
        }
        // a representative geometry catches protocol/drive/flavor mistakes
        self.scenario(&self.array, d[d.len() - 1].max(1.0))?.check()
    }

    /// The physical setup for `array_spec` at separation `d`.
    pub fn scenario(&self, array_spec: &ArraySpec, d: f64) -> Result<Scenario> {
        Ok(Scenario {
            array: array_spec.build(d)?,
            drive: self.drive.clone(),
            protocol: self.protocol,
            time: self.time(),
            initial: self.initial(),
            flavor: self.flavor,
            detector: self.detector.clone(),
            capacity: Capacity::default(),
        })
    }
}
