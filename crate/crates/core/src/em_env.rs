//! Free-space dyadic Green's tensor, the collective coupling matrices it
//! induces, and the coefficient matrices that weight the correlation sums.
//!
//! With lengths in λ the wavenumber is `k = 2π`. The single-emitter rate is
//! `γ₀ ∝ Im G_zz(R → 0) = k/6π`, so couplings are reported as
//!
//! ```text
//! γ_μν/γ₀ =  (6π/k) Im[d_μ · G(R_μ, R_ν) · d_ν]
//! Δ_μν/γ₀ = -(3π/k) Re[d_μ · G(R_μ, R_ν) · d_ν]
//! ```

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::geometry::{dot, norm, sub, DetectorConfig, EmitterArray, Vec3};

const K: f64 = TAU;

/// Below this separation (in λ) the tensor is treated as singular.
const SINGULAR_DISTANCE: f64 = 1e-9;

/// The 3×3 dyad `G(r, s)` including the `e^{ikR}/(4πR)` factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreensTensor(pub [[Complex64; 3]; 3]);

impl GreensTensor {
    pub fn transpose(&self) -> Self {
        let g = &self.0;
        let mut t = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = g[j][i];
            }
        }
        GreensTensor(t)
    }

    /// `a · G · b` for real vectors.
    pub fn contract(&self, a: &Vec3, b: &Vec3) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += self.0[i][j] * (a[i] * b[j]);
            }
        }
        acc
    }
}

/// `u cos u − sin u`, with a series near zero where the two terms cancel.
fn ucos_minus_sin(u: f64) -> f64 {
    if u < 0.5 {
        // Σ_{k≥1} (−1)^k 2k u^{2k+1} / (2k+1)!
        let u2 = u * u;
        let mut term = u; // u^{2k+1}/(2k+1)! at k = 0
        let mut acc = 0.0;
        for k in 1..12 {
            let kk = k as f64;
            term *= -u2 / ((2.0 * kk) * (2.0 * kk + 1.0));
            acc += 2.0 * kk * term;
        }
        acc
    } else {
        u * u.cos() - u.sin()
    }
}

/// Scalar coefficients `(a, b)` with `G = [a R̂R̂ + b I] / (4πR)`, where
/// `a = (3/u² − 3i/u − 1) e^{iu}` and `b = (1 + i/u − 1/u²) e^{iu}`, `u = kR`.
/// Imaginary parts use a cancellation-free form.
fn dyad_coefficients(u: f64) -> (Complex64, Complex64) {
    let (s, c) = u.sin_cos();
    let u2 = u * u;
    let f1 = ucos_minus_sin(u);
    let a_re = (3.0 / u2 - 1.0) * c + 3.0 * s / u;
    let a_im = (-3.0 * f1 - u2 * s) / u2;
    let b_re = (1.0 - 1.0 / u2) * c - s / u;
    let b_im = (f1 + u2 * s) / u2;
    (Complex64::new(a_re, a_im), Complex64::new(b_re, b_im))
}

/// Free-space Green's tensor between field point `r` and source point `s`,
/// both in λ.
pub fn greens_free_space(r: &Vec3, s: &Vec3) -> Result<GreensTensor> {
    let sep = sub(r, s);
    let dist = norm(&sep);
    if !(dist >= SINGULAR_DISTANCE) {
        return Err(Error::Singularity {
            i: 0,
            j: 1,
            distance: dist,
        });
    }
    let rhat = [sep[0] / dist, sep[1] / dist, sep[2] / dist];
    let (a, b) = dyad_coefficients(K * dist);
    let pref = 1.0 / (4.0 * PI * dist);
    let mut g = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            *v = (a * (rhat[i] * rhat[j]) + b * delta) * pref;
        }
    }
    Ok(GreensTensor(g))
}

/// Far-field radiation vector `(I − r̂r̂)·d · e^{−ik r̂·R}` of one emitter,
/// with the common `e^{ikr}/(4πr)` factor dropped.
pub fn far_field_greens(direction: &Vec3, emitter_pos: &Vec3, dipole: &Vec3) -> [Complex64; 3] {
    let proj = dot(direction, dipole);
    let phase = Complex64::from_polar(1.0, -K * dot(direction, emitter_pos));
    [0, 1, 2].map(|i| phase * (dipole[i] - direction[i] * proj))
}

/// Dissipative (`gamma`) and coherent (`delta`) couplings in units of γ₀.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrices {
    pub gamma: DMatrix<f64>,
    pub delta: DMatrix<f64>,
}

impl CouplingMatrices {
    /// Non-interacting emitters: `gamma = I`, `delta = 0`.
    pub fn independent(n: usize) -> Self {
        CouplingMatrices {
            gamma: DMatrix::identity(n, n),
            delta: DMatrix::zeros(n, n),
        }
    }

    /// Dicke limit: every coupling equal to the self term.
    pub fn dicke(n: usize) -> Self {
        CouplingMatrices {
            gamma: DMatrix::from_element(n, n, 1.0),
            delta: DMatrix::zeros(n, n),
        }
    }

    pub fn from_parts(gamma: DMatrix<f64>, delta: DMatrix<f64>) -> Result<Self> {
        let n = gamma.nrows();
        if gamma.ncols() != n || delta.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "gamma {:?} and delta {:?} must be square and equal",
                gamma.shape(),
                delta.shape()
            )));
        }
        for m in [&gamma, &delta] {
            let scale = m.amax().max(1.0);
            if (m - m.transpose()).amax() > 1e-10 * scale {
                return Err(validation("coupling matrices must be symmetric"));
            }
        }
        Ok(CouplingMatrices { gamma, delta })
    }

    pub fn len(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.nrows() == 0
    }

    pub fn restrict(&self, indices: &[usize]) -> Self {
        let pick = |m: &DMatrix<f64>| {
            DMatrix::from_fn(indices.len(), indices.len(), |i, j| {
                m[(indices[i], indices[j])]
            })
        };
        CouplingMatrices {
            gamma: pick(&self.gamma),
            delta: pick(&self.delta),
        }
    }

    /// Smallest eigenvalue of `gamma`.
    pub fn gamma_min_eigenvalue(&self) -> f64 {
        self.gamma
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Dumps both matrices row by row, preceded by a comment line with `N`
    /// and the lattice constant.
    pub fn write_csv<W: Write>(&self, mut out: W, d_over_lambda: f64) -> Result<()> {
        let n = self.len();
        writeln!(out, "# N={n} d_over_lambda={d_over_lambda}")?;
        let mut header = vec!["matrix".to_string(), "row".to_string()];
        header.extend((0..n).map(|j| format!("c{j}")));
        writeln!(out, "{}", header.join(","))?;
        for (name, m) in [("gamma", &self.gamma), ("delta", &self.delta)] {
            for i in 0..n {
                let row: Vec<String> = (0..n).map(|j| format!("{:.17e}", m[(i, j)])).collect();
                writeln!(out, "{name},{i},{}", row.join(","))?;
            }
        }
        Ok(())
    }
}

/// Builds `gamma` and `delta` for an array. The diagonal of `delta` (the
/// single-emitter Lamb shift) is absorbed into the transition frequency and
/// set to zero.
pub fn coupling_matrices(array: &EmitterArray) -> Result<CouplingMatrices> {
    let n = array.len();
    if array.is_coincident() {
        return Ok(CouplingMatrices::dicke(n));
    }
    let pos = array.positions();
    let dip = array.dipoles();
    let mut gamma = DMatrix::identity(n, n);
    let mut delta = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let g = greens_free_space(&pos[i], &pos[j]).map_err(|e| match e {
                Error::Singularity { distance, .. } => Error::Singularity { i, j, distance },
                other => other,
            })?;
            let c = g.contract(&dip[i], &dip[j]);
            let gij = (6.0 * PI / K) * c.im;
            let dij = -(3.0 * PI / K) * c.re;
            gamma[(i, j)] = gij;
            gamma[(j, i)] = gij;
            delta[(i, j)] = dij;
            delta[(j, i)] = dij;
        }
    }
    Ok(CouplingMatrices { gamma, delta })
}

/// Which correlation function the coefficient matrices select.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// Direction- and polarization-integrated; coefficients are `gamma`.
    #[default]
    Total,
    /// Polarization-summed, fixed emission directions.
    Directional,
    /// Fixed directions and polarization analysers.
    PolarizedDirectional,
}

impl Flavor {
    pub fn needs_detector(self) -> bool {
        !matches!(self, Flavor::Total)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Total => "total",
            Flavor::Directional => "directional",
            Flavor::PolarizedDirectional => "polarized-directional",
        }
    }
}

/// Hermitian coefficient matrix `A_μν` of one detector.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMatrix {
    pub flavor: Flavor,
    pub entries: DMatrix<Complex64>,
}

impl CoeffMatrix {
    pub fn from_real(flavor: Flavor, m: &DMatrix<f64>) -> Self {
        CoeffMatrix {
            flavor,
            entries: m.map(|x| Complex64::new(x, 0.0)),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoeffMatrix {
            flavor: self.flavor,
            entries: self.entries.map(|z| z * s),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self
            .entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        (&self.entries - self.entries.adjoint())
            .iter()
            .all(|z| z.norm() <= tol * scale)
    }

    pub fn restrict(&self, indices: &[usize]) -> Self {
        CoeffMatrix {
            flavor: self.flavor,
            entries: DMatrix::from_fn(indices.len(), indices.len(), |i, j| {
                self.entries[(indices[i], indices[j])]
            }),
        }
    }
}

/// Coefficient matrix for a single detector direction (and optional
/// polarization): `A_μν = v_μ · v_ν*` with `v_μ` the far-field vector of
/// emitter μ, or its projection on the polarization.
pub fn detector_coeff_matrix(
    array: &EmitterArray,
    direction: &Vec3,
    polarization: Option<&Vec3>,
) -> CoeffMatrix {
    let n = array.len();
    let fields: Vec<[Complex64; 3]> = array
        .positions()
        .iter()
        .zip(array.dipoles())
        .map(|(p, d)| far_field_greens(direction, p, d))
        .collect();
    let (flavor, entries) = match polarization {
        None => (
            Flavor::Directional,
            DMatrix::from_fn(n, n, |i, j| {
                (0..3).map(|c| fields[i][c] * fields[j][c].conj()).sum()
            }),
        ),
        Some(e) => {
            let amp: Vec<Complex64> = fields
                .iter()
                .map(|f| f[0] * e[0] + f[1] * e[1] + f[2] * e[2])
                .collect();
            (
                Flavor::PolarizedDirectional,
                DMatrix::from_fn(n, n, |i, j| amp[i] * amp[j].conj()),
            )
        }
    };
    CoeffMatrix { flavor, entries }
}

/// Coefficient matrices `(A^a, A^b)` of the two detectors for a flavor.
pub fn coeff_matrices(
    array: &EmitterArray,
    couplings: &CouplingMatrices,
    flavor: Flavor,
    detector: Option<&DetectorConfig>,
) -> Result<(CoeffMatrix, CoeffMatrix)> {
    if couplings.len() != array.len() {
        return Err(Error::DimensionMismatch(format!(
            "couplings for {} emitters, array has {}",
            couplings.len(),
            array.len()
        )));
    }
    match (flavor, detector) {
        (Flavor::Total, _) => {
            let a = CoeffMatrix::from_real(Flavor::Total, &couplings.gamma);
            Ok((a.clone(), a))
        }
        (_, None) => Err(validation(format!(
            "flavor '{}' requires a detector configuration",
            flavor.as_str()
        ))),
        (Flavor::Directional, Some(det)) => Ok((
            detector_coeff_matrix(array, &det.direction_a(), None),
            detector_coeff_matrix(array, &det.direction_b(), None),
        )),
        (Flavor::PolarizedDirectional, Some(det)) => {
            let (pa, pb) = match (det.polarization_a(), det.polarization_b()) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(validation(
                        "polarized-directional flavor requires both detector polarizations",
                    ))
                }
            };
            Ok((
                detector_coeff_matrix(array, &det.direction_a(), Some(&pa)),
                detector_coeff_matrix(array, &det.direction_b(), Some(&pb)),
            ))
        }
    }
}
