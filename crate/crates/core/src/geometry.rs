//! Emitter arrays and the detector / drive descriptions that go with them.
//!
//! Lengths are in units of the transition wavelength λ and rates in units of
//! the single-emitter decay rate γ₀, so the wavenumber is always `k = 2π`.

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

pub type Vec3 = [f64; 3];

/// Tolerance on the Euclidean norm of anything declared a unit vector.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Default minimum separation between distinct emitters, in λ.
pub const DEFAULT_EPS_MIN: f64 = 1e-3;

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn check_unit(v: &Vec3, what: &str) -> Result<()> {
    let n = norm(v);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(validation(format!("{what} {v:?} has norm {n}, expected 1")));
    }
    Ok(())
}

/// Positions and dipole orientations of N identical two-level emitters.
///
/// A `coincident` array is the Dicke limit: every pair is treated as sharing
/// one point, with identical couplings, regardless of the stored positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArray", into = "RawArray")]
pub struct EmitterArray {
    positions: Vec<Vec3>,
    dipoles: Vec<Vec3>,
    coincident: bool,
}

#[derive(Serialize, Deserialize)]
struct RawArray {
    positions: Vec<Vec3>,
    dipoles: Vec<Vec3>,
    #[serde(default)]
    coincident: bool,
}

impl TryFrom<RawArray> for EmitterArray {
    type Error = Error;

    fn try_from(raw: RawArray) -> Result<Self> {
        let mut array = EmitterArray::new(raw.positions, raw.dipoles)?;
        array.coincident = raw.coincident;
        Ok(array)
    }
}

impl From<EmitterArray> for RawArray {
    fn from(a: EmitterArray) -> Self {
        RawArray {
            positions: a.positions,
            dipoles: a.dipoles,
            coincident: a.coincident,
        }
    }
}

impl EmitterArray {
    pub fn new(positions: Vec<Vec3>, dipoles: Vec<Vec3>) -> Result<Self> {
        if positions.is_empty() {
            return Err(validation("an emitter array needs at least one emitter"));
        }
        if positions.len() != dipoles.len() {
            return Err(validation(format!(
                "{} positions but {} dipoles",
                positions.len(),
                dipoles.len()
            )));
        }
        if let Some(p) = positions.iter().flatten().find(|x| !x.is_finite()) {
            return Err(validation(format!("non-finite position coordinate {p}")));
        }
        for d in &dipoles {
            check_unit(d, "dipole")?;
        }
        Ok(EmitterArray {
            positions,
            dipoles,
            coincident: false,
        })
    }

    /// `n` emitters sharing the origin, flagged as the Dicke limit.
    pub fn coincident(n: usize, dipole: Vec3) -> Result<Self> {
        let mut array = EmitterArray::new(vec![[0.0; 3]; n], vec![dipole; n])?;
        array.coincident = true;
        Ok(array)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn dipoles(&self) -> &[Vec3] {
        &self.dipoles
    }

    pub fn is_coincident(&self) -> bool {
        self.coincident
    }

    pub fn with_coincident(mut self, flag: bool) -> Self {
        self.coincident = flag;
        self
    }

    /// The sub-array formed by `indices`, in the order given. Positions are
    /// kept absolute so drive phases and far-field phases stay consistent
    /// with the parent array.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(validation("empty subset"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(validation(format!(
                "subset index {bad} out of range for {} emitters",
                self.len()
            )));
        }
        Ok(EmitterArray {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            dipoles: indices.iter().map(|&i| self.dipoles[i]).collect(),
            coincident: self.coincident,
        })
    }

    pub fn translated(&self, shift: Vec3) -> Self {
        EmitterArray {
            positions: self.positions.iter().map(|p| add(p, &shift)).collect(),
            dipoles: self.dipoles.clone(),
            coincident: self.coincident,
        }
    }

    /// True if every dipole equals the first within the unit-norm tolerance.
    pub fn dipoles_aligned(&self) -> bool {
        let d0 = self.dipoles[0];
        self.dipoles
            .iter()
            .all(|d| norm(&sub(d, &d0)) <= 10.0 * UNIT_NORM_TOL)
    }

    pub fn min_pairwise_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let r = norm(&sub(&self.positions[i], &self.positions[j]));
                best = Some(best.map_or(r, |b| b.min(r)));
            }
        }
        best
    }
}

/// `n` emitters at `j * spacing * axis`, all with the same dipole.
pub fn build_chain(n: usize, spacing: f64, axis: Vec3, dipole: Vec3) -> Result<EmitterArray> {
    if n == 0 {
        return Err(validation("chain needs n >= 1"));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(validation(format!(
            "chain spacing must be > 0, got {spacing}"
        )));
    }
    check_unit(&axis, "chain axis")?;
    let positions = (0..n).map(|j| scale(&axis, j as f64 * spacing)).collect();
    EmitterArray::new(positions, vec![dipole; n])
}

/// `side × side` emitters on a square grid in the x–y plane. Emitter
/// `iy * side + ix` sits at `(ix, iy, 0) * spacing`.
pub fn build_square_lattice(side: usize, spacing: f64, dipole: Vec3) -> Result<EmitterArray> {
    if side == 0 {
        return Err(validation("square lattice needs side >= 1"));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(validation(format!(
            "lattice spacing must be > 0, got {spacing}"
        )));
    }
    let positions = (0..side * side)
        .map(|idx| {
            let (ix, iy) = (idx % side, idx / side);
            [ix as f64 * spacing, iy as f64 * spacing, 0.0]
        })
        .collect();
    EmitterArray::new(positions, vec![dipole; side * side])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub min_distance: Option<f64>,
    /// Pairs closer than `eps_min`, with their separation.
    pub close_pairs: Vec<(usize, usize, f64)>,
    /// Dipoles whose norm deviates from 1, with the norm.
    pub dipole_violations: Vec<(usize, f64)>,
    pub coincident: bool,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.close_pairs.is_empty() && self.dipole_violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            return Ok(());
        }
        let mut msg = String::new();
        if let Some(&(i, j, r)) = self.close_pairs.first() {
            msg.push_str(&format!(
                "{} pair(s) closer than eps_min, e.g. emitters {i},{j} at {r:e} lambda",
                self.close_pairs.len()
            ));
        }
        if let Some(&(i, n)) = self.dipole_violations.first() {
            msg.push_str(&format!("dipole {i} has norm {n}"));
        }
        Err(Error::Validation(msg))
    }
}

/// Reports the minimum pairwise distance and any violations without failing.
/// Coincident-flagged arrays skip the distance check.
pub fn validate(array: &EmitterArray, eps_min: f64) -> ValidationReport {
    let min_distance = array.min_pairwise_distance();
    let mut close_pairs = Vec::new();
    if !array.is_coincident() {
        let p = array.positions();
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                let r = norm(&sub(&p[i], &p[j]));
                if r < eps_min {
                    close_pairs.push((i, j, r));
                }
            }
        }
    }
    let dipole_violations = array
        .dipoles()
        .iter()
        .enumerate()
        .map(|(i, d)| (i, norm(d)))
        .filter(|(_, n)| (n - 1.0).abs() > UNIT_NORM_TOL)
        .collect();
    ValidationReport {
        min_distance,
        close_pairs,
        dipole_violations,
        coincident: array.is_coincident(),
    }
}

/// Two far-field detectors, given by emission direction and optional
/// polarization analyser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDetector", into = "RawDetector")]
pub struct DetectorConfig {
    direction_a: Vec3,
    direction_b: Vec3,
    polarization_a: Option<Vec3>,
    polarization_b: Option<Vec3>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    direction_a: Vec3,
    direction_b: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarization_a: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarization_b: Option<Vec3>,
}

impl TryFrom<RawDetector> for DetectorConfig {
    type Error = Error;

    fn try_from(r: RawDetector) -> Result<Self> {
        DetectorConfig::new(
            r.direction_a,
            r.direction_b,
            r.polarization_a,
            r.polarization_b,
        )
    }
}

impl From<DetectorConfig> for RawDetector {
    fn from(d: DetectorConfig) -> Self {
        RawDetector {
            direction_a: d.direction_a,
            direction_b: d.direction_b,
            polarization_a: d.polarization_a,
            polarization_b: d.polarization_b,
        }
    }
}

impl DetectorConfig {
    pub fn new(
        direction_a: Vec3,
        direction_b: Vec3,
        polarization_a: Option<Vec3>,
        polarization_b: Option<Vec3>,
    ) -> Result<Self> {
        check_unit(&direction_a, "detector direction a")?;
        check_unit(&direction_b, "detector direction b")?;
        for (pol, dir, label) in [
            (&polarization_a, &direction_a, "a"),
            (&polarization_b, &direction_b, "b"),
        ] {
            if let Some(p) = pol {
                check_unit(p, "polarization")?;
                if dot(p, dir).abs() >= 1e-10 {
                    return Err(validation(format!(
                        "polarization {label} {p:?} is not transverse to its direction {dir:?}"
                    )));
                }
            }
        }
        Ok(DetectorConfig {
            direction_a,
            direction_b,
            polarization_a,
            polarization_b,
        })
    }

    /// Detectors along x̂ and ŷ, the arrangement used for lattices in the x–y plane.
    pub fn along_x_and_y() -> Self {
        DetectorConfig::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], None, None)
            .expect("unit axes are valid")
    }

    pub fn direction_a(&self) -> Vec3 {
        self.direction_a
    }

    pub fn direction_b(&self) -> Vec3 {
        self.direction_b
    }

    pub fn polarization_a(&self) -> Option<Vec3> {
        self.polarization_a
    }

    pub fn polarization_b(&self) -> Option<Vec3> {
        self.polarization_b
    }
}

/// Coherent plane-wave drive. The phase at emitter μ is
/// `2π (ω_L/ω₀) k̂_L · R_μ`, with `R_μ` in λ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDrive", into = "RawDrive")]
pub struct DriveParams {
    rabi: f64,
    detuning: f64,
    k_direction: Vec3,
    k_magnitude_over_k0: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    rabi: f64,
    #[serde(default)]
    detuning: f64,
    #[serde(default = "default_k_direction")]
    k_direction: Vec3,
    #[serde(default = "one")]
    k_magnitude_over_k0: f64,
}

fn default_k_direction() -> Vec3 {
    [1.0, 0.0, 0.0]
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawDrive> for DriveParams {
    type Error = Error;

    fn try_from(r: RawDrive) -> Result<Self> {
        DriveParams::new(r.rabi, r.detuning, r.k_direction, r.k_magnitude_over_k0)
    }
}

impl From<DriveParams> for RawDrive {
    fn from(d: DriveParams) -> Self {
        RawDrive {
            rabi: d.rabi,
            detuning: d.detuning,
            k_direction: d.k_direction,
            k_magnitude_over_k0: d.k_magnitude_over_k0,
        }
    }
}

impl DriveParams {
    pub fn new(
        rabi: f64,
        detuning: f64,
        k_direction: Vec3,
        k_magnitude_over_k0: f64,
    ) -> Result<Self> {
        if !(rabi >= 0.0 && rabi.is_finite()) {
            return Err(validation(format!(
                "Rabi frequency must be >= 0, got {rabi}"
            )));
        }
        if !detuning.is_finite() {
            return Err(validation("detuning must be finite"));
        }
        check_unit(&k_direction, "drive direction")?;
        if !(k_magnitude_over_k0 > 0.0 && k_magnitude_over_k0.is_finite()) {
            return Err(validation(format!(
                "k_magnitude_over_k0 must be > 0, got {k_magnitude_over_k0}"
            )));
        }
        Ok(DriveParams {
            rabi,
            detuning,
            k_direction,
            k_magnitude_over_k0,
        })
    }

    /// Resonant drive along x̂.
    pub fn resonant(rabi: f64) -> Result<Self> {
        DriveParams::new(rabi, 0.0, [1.0, 0.0, 0.0], 1.0)
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn k_direction(&self) -> Vec3 {
        self.k_direction
    }

    pub fn k_magnitude_over_k0(&self) -> f64 {
        self.k_magnitude_over_k0
    }

    /// `k_L · R` for a position in λ.
    pub fn phase_at(&self, position: &Vec3) -> f64 {
        std::f64::consts::TAU * self.k_magnitude_over_k0 * dot(&self.k_direction, position)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: Vec3 = [1.0, 0.0, 0.0];
    const Z: Vec3 = [0.0, 0.0, 1.0];

    #[test]
    fn chain_positions() {
        let c = build_chain(3, 0.5, X, Z).unwrap();
        assert_eq!(c.positions(), &[[0.0; 3], [0.5, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert!(c.dipoles().iter().all(|d| *d == Z));

        let single = build_chain(1, 0.5, X, Z).unwrap();
        assert_eq!(single.positions(), &[[0.0; 3]]);

        let long = build_chain(8, 0.1, X, Z).unwrap();
        let xs: Vec<f64> = long.positions().iter().map(|p| p[0]).collect();
        let extent = xs.iter().cloned().fold(f64::MIN, f64::max)
            - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((extent - 0.7).abs() < 1e-12);
    }

    #[test]
    fn chain_rejects_non_unit_vectors() {
        assert!(matches!(
            build_chain(3, 0.5, [2.0, 0.0, 0.0], Z),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            build_chain(3, 0.5, X, [0.0, 0.0, 0.9]),
            Err(Error::Validation(_))
        ));
        assert!(build_chain(0, 0.5, X, Z).is_err());
    }

    #[test]
    fn square_lattice_layout() {
        let l = build_square_lattice(2, 0.3, Z).unwrap();
        assert_eq!(
            l.positions(),
            &[
                [0.0, 0.0, 0.0],
                [0.3, 0.0, 0.0],
                [0.0, 0.3, 0.0],
                [0.3, 0.3, 0.0]
            ]
        );
        assert_eq!(build_square_lattice(8, 0.4, Z).unwrap().len(), 64);
        assert_eq!(build_square_lattice(1, 0.4, Z).unwrap().len(), 1);
    }

    #[test]
    fn validate_reports() {
        let c = build_chain(2, 0.5, X, Z).unwrap();
        let r = validate(&c, DEFAULT_EPS_MIN);
        assert!(r.is_ok());
        assert!((r.min_distance.unwrap() - 0.5).abs() < 1e-15);
        // idempotent
        assert_eq!(r, validate(&c, DEFAULT_EPS_MIN));

        let stacked = EmitterArray::new(vec![[0.0; 3]; 2], vec![Z; 2]).unwrap();
        let r = validate(&stacked, DEFAULT_EPS_MIN);
        assert!(!r.is_ok());
        assert_eq!(r.close_pairs.len(), 1);
        assert!(r.into_result().is_err());

        let dicke = EmitterArray::coincident(5, Z).unwrap();
        assert!(validate(&dicke, DEFAULT_EPS_MIN).is_ok());
    }

    #[test]
    fn detector_polarization_must_be_transverse() {
        assert!(DetectorConfig::new(X, [0.0, 1.0, 0.0], Some(Z), Some(Z)).is_ok());
        assert!(DetectorConfig::new(X, [0.0, 1.0, 0.0], Some(X), None).is_err());
        assert!(DetectorConfig::new([0.5, 0.0, 0.0], X, None, None).is_err());
    }

    #[test]
    fn array_json_round_trip_keeps_flag() {
        let dicke = EmitterArray::coincident(3, Z).unwrap();
        let s = serde_json::to_string(&dicke).unwrap();
        let back: EmitterArray = serde_json::from_str(&s).unwrap();
        assert_eq!(back, dicke);
        let bad = r#"{"positions": [[0,0,0]], "dipoles": [[0,0,2]]}"#;
        assert!(serde_json::from_str::<EmitterArray>(bad).is_err());
    }

    #[test]
    fn drive_phase() {
        let d = DriveParams::resonant(5.0).unwrap();
        assert!((d.phase_at(&[0.5, 3.0, 0.0]) - std::f64::consts::PI).abs() < 1e-12);
    }
}
