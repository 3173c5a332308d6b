//! Normalized zero-delay second-order correlations and their closed-form
//! reference values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::em_env::{coupling_matrices, CoeffMatrix, CouplingMatrices, Flavor};
use crate::error::{Error, Result};
use crate::geometry::{dot, sub, DriveParams, EmitterArray, Vec3};
use crate::quantum::{evolve, DensityState, EvolveOptions, Liouvillian};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Time at which a correlation is evaluated: a number in 1/γ₀, or the
/// string `"steady"` in JSON.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimePoint {
    At(f64),
    Steady,
}

impl Serialize for TimePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimePoint::At(t) => s.serialize_f64(*t),
            TimePoint::Steady => s.serialize_str("steady"),
        }
    }
}

impl<'de> Deserialize<'de> for TimePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) if t >= 0.0 && t.is_finite() => Ok(TimePoint::At(t)),
            Raw::Num(t) => Err(serde::de::Error::custom(format!(
                "time must be >= 0, got {t}"
            ))),
            Raw::Str(s) if s == "steady" => Ok(TimePoint::Steady),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a time or \"steady\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationResult {
    pub value: f64,
    pub flavor: Flavor,
    pub time: Option<TimePoint>,
    /// Always 0; finite delays are not implemented.
    pub delay: f64,
    /// `|Im(num/den)|`, which vanishes for Hermitian coefficient matrices.
    pub imag_residual: f64,
}

impl CorrelationResult {
    pub fn at(mut self, time: TimePoint) -> Self {
        self.time = Some(time);
        self
    }
}

/// Normally ordered one- and two-excitation moments of a register state.
///
/// `one[(μ, ν)] = ⟨σ⁺_μ σ⁻_ν⟩`. Two-body moments are indexed by unordered
/// emitter pairs: `two[(p, q)] = ⟨σ⁺_{q.0} σ⁺_{q.1} σ⁻_{p.0} σ⁻_{p.1}⟩`, the
/// only non-vanishing arrangement of distinct indices.
#[derive(Clone, Debug)]
pub struct CorrelationTensors {
    pub one: DMatrix<Complex64>,
    pub pairs: Vec<(usize, usize)>,
    pub two: DMatrix<Complex64>,
}

/// Calls `f` with every subset of `mask` (including the empty one).
#[inline]
fn for_each_subset(mask: usize, mut f: impl FnMut(usize)) {
    let mut sub = mask;
    loop {
        f(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mask;
    }
}

/// `⟨σ⁺_μ σ⁻_ν⟩` for all μ, ν.
pub fn one_body_moments(rho: &DensityState) -> DMatrix<Complex64> {
    let n = rho.n();
    let dim = rho.dim();
    let full = dim - 1;
    let data = rho.as_vec();
    DMatrix::from_fn(n, n, |mu, nu| {
        let (bm, bn) = (1usize << mu, 1usize << nu);
        let mut acc = ZERO;
        // Tr[σ⁺_μ σ⁻_ν ρ] = Σ_s ρ[s ∪ ν, s ∪ μ] over s avoiding μ and ν
        for_each_subset(full & !(bm | bn), |s| {
            acc += data[(s | bn) + (s | bm) * dim]
        });
        acc
    })
}

impl CorrelationTensors {
    pub fn new(rho: &DensityState) -> Self {
        let n = rho.n();
        let dim = rho.dim();
        let full = dim - 1;
        let data = rho.as_vec();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let masks: Vec<usize> = pairs.iter().map(|&(a, b)| 1 << a | 1 << b).collect();
        let two = DMatrix::from_fn(pairs.len(), pairs.len(), |p, q| {
            let (pm, qm) = (masks[p], masks[q]);
            let mut acc = ZERO;
            for_each_subset(full & !(pm | qm), |s| {
                acc += data[(s | pm) + (s | qm) * dim]
            });
            acc
        });
        CorrelationTensors {
            one: one_body_moments(rho),
            pairs,
            two,
        }
    }

    pub fn n(&self) -> usize {
        self.one.nrows()
    }

    /// `Σ_μνγε A^a_εμ A^b_γν ⟨σ⁺_μ σ⁺_ν σ⁻_γ σ⁻_ε⟩`.
    pub fn numerator(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
        let mut acc = ZERO;
        for (p, &(g0, g1)) in self.pairs.iter().enumerate() {
            for (q, &(m0, m1)) in self.pairs.iter().enumerate() {
                let t = self.two[(p, q)];
                if t == ZERO {
                    continue;
                }
                let mut w = ZERO;
                for (mu, nu) in [(m0, m1), (m1, m0)] {
                    for (gamma, eps) in [(g0, g1), (g1, g0)] {
                        w += a[(eps, mu)] * b[(gamma, nu)];
                    }
                }
                acc += w * t;
            }
        }
        acc
    }

    /// `Σ_μν A_νμ ⟨σ⁺_μ σ⁻_ν⟩`.
    pub fn intensity(&self, a: &DMatrix<Complex64>) -> Complex64 {
        let n = self.n();
        let mut acc = ZERO;
        for mu in 0..n {
            for nu in 0..n {
                acc += a[(nu, mu)] * self.one[(mu, nu)];
            }
        }
        acc
    }

    /// `Σ_μ A^a_μμ A^b_μμ ⟨σ⁺_μ σ⁻_μ⟩²`, the same-emitter part of the
    /// product of intensities.
    pub fn same_emitter_intensity(
        &self,
        a: &DMatrix<Complex64>,
        b: &DMatrix<Complex64>,
    ) -> Complex64 {
        (0..self.n())
            .map(|mu| a[(mu, mu)] * b[(mu, mu)] * self.one[(mu, mu)] * self.one[(mu, mu)])
            .sum()
    }
}

fn check_dims(rho: &DensityState, a: &CoeffMatrix, b: &CoeffMatrix) -> Result<()> {
    let n = rho.n();
    for m in [&a.entries, &b.entries] {
        if m.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient matrix {:?} for a {n}-emitter register",
                m.shape()
            )));
        }
    }
    Ok(())
}

fn ratio(num: Complex64, den: Complex64, scale: f64, flavor: Flavor) -> Result<CorrelationResult> {
    if !(den.norm() > 1e-14 * scale.max(1e-300)) {
        return Err(Error::UndefinedCorrelation {
            denominator: den.norm(),
        });
    }
    let r = num / den;
    Ok(CorrelationResult {
        value: r.re,
        flavor,
        time: None,
        delay: 0.0,
        imag_residual: r.im.abs(),
    })
}

fn abs_sum(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).sum()
}

/// Normalized zero-delay correlation of the two detectors described by
/// `a` and `b`, evaluated on `rho`.
pub fn a2_zero_delay(
    rho: &DensityState,
    a: &CoeffMatrix,
    b: &CoeffMatrix,
) -> Result<CorrelationResult> {
    check_dims(rho, a, b)?;
    a2_from_tensors(&CorrelationTensors::new(rho), a, b)
}

pub fn a2_from_tensors(
    t: &CorrelationTensors,
    a: &CoeffMatrix,
    b: &CoeffMatrix,
) -> Result<CorrelationResult> {
    let num = t.numerator(&a.entries, &b.entries);
    let den = t.intensity(&a.entries) * t.intensity(&b.entries);
    ratio(
        num,
        den,
        abs_sum(&a.entries) * abs_sum(&b.entries),
        a.flavor,
    )
}

/// The correlation with same-emitter terms removed from the denominator, as
/// used for sampled pairs: the product of intensities loses its
/// `⟨σ⁺_μσ⁻_μ⟩²` contributions. The numerator needs no change since a
/// two-level emitter cannot be lowered twice.
pub fn a2_cross_terms(
    rho: &DensityState,
    a: &CoeffMatrix,
    b: &CoeffMatrix,
) -> Result<CorrelationResult> {
    check_dims(rho, a, b)?;
    let t = CorrelationTensors::new(rho);
    let num = t.numerator(&a.entries, &b.entries);
    let den = t.intensity(&a.entries) * t.intensity(&b.entries)
        - t.same_emitter_intensity(&a.entries, &b.entries);
    ratio(
        num,
        den,
        abs_sum(&a.entries) * abs_sum(&b.entries),
        a.flavor,
    )
}

/// Closed form of the total-flavor correlation for a fully inverted array:
/// `1 + Σ_{μ≠ν} γ_μν² / (Σ γ_μμ)² − Σ γ_μμ² / (Σ γ_μμ)²`.
pub fn inverted_array_closed_form(gamma: &DMatrix<f64>) -> f64 {
    let n = gamma.nrows();
    let mut off = 0.0;
    let mut diag = 0.0;
    let mut diag_sq = 0.0;
    for mu in 0..n {
        diag += gamma[(mu, mu)];
        diag_sq += gamma[(mu, mu)] * gamma[(mu, mu)];
        for nu in 0..n {
            if mu != nu {
                off += gamma[(mu, nu)] * gamma[(mu, nu)];
            }
        }
    }
    1.0 + off / (diag * diag) - diag_sq / (diag * diag)
}

/// Inverted-array value for arbitrary coefficient matrices:
/// `Σ_{μ≠ν} (A^a_νμ A^b_μν + A^a_μμ A^b_νν) / (Σ A^a_μμ)(Σ A^b_νν)`.
pub fn inverted_closed_form(a: &CoeffMatrix, b: &CoeffMatrix) -> Result<f64> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch(
            "coefficient matrices differ in size".into(),
        ));
    }
    let (a, b) = (&a.entries, &b.entries);
    let mut num = ZERO;
    for mu in 0..n {
        for nu in (0..n).filter(|&nu| nu != mu) {
            num += a[(nu, mu)] * b[(mu, nu)] + a[(mu, mu)] * b[(nu, nu)];
        }
    }
    let den = a.trace() * b.trace();
    if den.norm() == 0.0 {
        return Err(Error::UndefinedCorrelation { denominator: 0.0 });
    }
    Ok((num / den).re)
}

/// `2(N−1)/N`.
pub fn dicke_value(n: usize) -> f64 {
    2.0 * (n as f64 - 1.0) / n as f64
}

/// `(N−1)/N`.
pub fn independent_value(n: usize) -> f64 {
    (n as f64 - 1.0) / n as f64
}

/// Total photon emission rate `Σ_μν γ_μν ⟨σ⁺_μ σ⁻_ν⟩` in units of γ₀.
pub fn emission_rate(rho: &DensityState, gamma: &DMatrix<f64>) -> Result<f64> {
    let n = rho.n();
    if gamma.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "gamma {:?} for a {n}-emitter register",
            gamma.shape()
        )));
    }
    let one = one_body_moments(rho);
    let mut acc = ZERO;
    for mu in 0..n {
        for nu in 0..n {
            acc += gamma[(mu, nu)] * one[(mu, nu)];
        }
    }
    Ok(acc.re)
}

/// Both sides of `Ṙ(0) = R(0)² (𝒢⁽²⁾(0,0) − 1)` for an undriven, initially
/// inverted array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeCheck {
    /// Finite-difference slope of the evolved emission rate.
    pub lhs: f64,
    pub rhs: f64,
    pub rate0: f64,
    pub g2: f64,
}

impl SlopeCheck {
    /// `|lhs − rhs| / |rhs|`, or the absolute gap when `rhs` vanishes.
    pub fn relative_discrepancy(&self) -> f64 {
        let gap = (self.lhs - self.rhs).abs();
        if self.rhs == 0.0 {
            gap
        } else {
            gap / self.rhs.abs()
        }
    }
}

pub const SLOPE_STEP: f64 = 1e-4;

/// Evaluates the slope relation with a Richardson-extrapolated forward
/// difference of step `SLOPE_STEP`.
pub fn slope_relation_check(
    array: &EmitterArray,
    drive: Option<&DriveParams>,
) -> Result<SlopeCheck> {
    if drive.is_some_and(|d| d.rabi() != 0.0) {
        return Err(Error::Precondition(
            "the slope relation holds only without coherent drive".into(),
        ));
    }
    let couplings = coupling_matrices(array)?;
    slope_relation_from_couplings(&couplings)
}

pub fn slope_relation_from_couplings(couplings: &CouplingMatrices) -> Result<SlopeCheck> {
    let n = couplings.len();
    let l = Liouvillian::from_phases(couplings, None, &vec![0.0; n])?;
    let opts = EvolveOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        ..EvolveOptions::default()
    };
    let h = SLOPE_STEP;
    let rho0 = DensityState::inverted(n);
    let states = evolve(&rho0, &l, &[0.0, h / 2.0, h], &opts)?;
    let rates: Vec<f64> = states
        .iter()
        .map(|s| emission_rate(s, &couplings.gamma))
        .collect::<Result<_>>()?;
    let d_full = (rates[2] - rates[0]) / h;
    let d_half = (rates[1] - rates[0]) / (h / 2.0);
    let lhs = 2.0 * d_half - d_full;
    let a = CoeffMatrix::from_real(Flavor::Total, &couplings.gamma);
    let g2 = a2_zero_delay(&rho0, &a, &a)?.value;
    let rate0 = rates[0];
    Ok(SlopeCheck {
        lhs,
        rhs: rate0 * rate0 * (g2 - 1.0),
        rate0,
        g2,
    })
}

/// Far-field directional correlation of an inverted array with aligned
/// dipoles: `N⁻² Σ_μν e^{ik r̂_a·R_μν} e^{ik r̂_b·R_νμ} + 1 − 2/N`.
pub fn far_field_inverted_g2(array: &EmitterArray, dir_a: &Vec3, dir_b: &Vec3) -> Result<f64> {
    if !array.dipoles_aligned() {
        return Err(Error::Precondition(
            "far-field closed form assumes all dipoles aligned".into(),
        ));
    }
    let n = array.len();
    let k = std::f64::consts::TAU;
    let pos = array.positions();
    let mut sum = ZERO;
    for rm in pos {
        for rn in pos {
            let r = sub(rm, rn);
            sum += Complex64::from_polar(1.0, k * (dot(dir_a, &r) - dot(dir_b, &r)));
        }
    }
    let nf = n as f64;
    Ok(sum.re / (nf * nf) + 1.0 - 2.0 / nf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em_env::{coeff_matrices, detector_coeff_matrix};
    use crate::geometry::{build_chain, build_square_lattice, DetectorConfig};
    use crate::quantum::{expectation, OperatorSpec};
    use nalgebra::Matrix2;

    const X: Vec3 = [1.0, 0.0, 0.0];
    const Y: Vec3 = [0.0, 1.0, 0.0];
    const Z: Vec3 = [0.0, 0.0, 1.0];

    fn generic_state(n: usize, seed: u64) -> DensityState {
        let dim = 1 << n;
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()));
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityState::from_matrix(m / tr).unwrap()
    }

    #[test]
    fn tensors_match_operator_expectations() {
        let n = 4;
        let rho = generic_state(n, 5);
        let t = CorrelationTensors::new(&rho);
        for mu in 0..n {
            for nu in 0..n {
                let want = expectation(&rho, &OperatorSpec::raise_lower(mu, nu)).unwrap();
                assert!((t.one[(mu, nu)] - want).norm() < 1e-14);
            }
        }
        for (p, &(g, e)) in t.pairs.iter().enumerate() {
            for (q, &(m, v)) in t.pairs.iter().enumerate() {
                let want =
                    expectation(&rho, &OperatorSpec::normal_ordered_pair(m, v, g, e)).unwrap();
                assert!((t.two[(p, q)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn numerator_matches_naive_quadruple_sum() {
        let n = 3;
        let rho = generic_state(n, 17);
        let array = build_chain(n, 0.37, X, Z).unwrap();
        let det = DetectorConfig::along_x_and_y();
        let a = detector_coeff_matrix(&array, &det.direction_a(), None);
        let b = detector_coeff_matrix(&array, &det.direction_b(), None);
        let mut naive = ZERO;
        let mut ia = ZERO;
        let mut ib = ZERO;
        for mu in 0..n {
            for nu in 0..n {
                let one = expectation(&rho, &OperatorSpec::raise_lower(mu, nu)).unwrap();
                ia += a.entries[(nu, mu)] * one;
                ib += b.entries[(nu, mu)] * one;
                for g in 0..n {
                    for e in 0..n {
                        naive += a.entries[(e, mu)]
                            * b.entries[(g, nu)]
                            * expectation(&rho, &OperatorSpec::normal_ordered_pair(mu, nu, g, e))
                                .unwrap();
                    }
                }
            }
        }
        let got = a2_zero_delay(&rho, &a, &b).unwrap();
        let want = naive / (ia * ib);
        assert!((got.value - want.re).abs() < 1e-12);
        assert!(got.imag_residual < 1e-8);
    }

    #[test]
    fn dicke_and_independent_values() {
        assert_eq!(dicke_value(2), 1.0);
        assert_eq!(dicke_value(64), 1.96875);
        assert!((dicke_value(1_000_000) - 2.0).abs() < 1e-5);
        assert_eq!(independent_value(64), 0.984375);
        for n in 2..=6 {
            let a = CoeffMatrix::from_real(Flavor::Total, &DMatrix::from_element(n, n, 1.0));
            let v = a2_zero_delay(&DensityState::inverted(n), &a, &a)
                .unwrap()
                .value;
            assert!((v - dicke_value(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn independent_product_states() {
        let c = |x: f64, y: f64| Complex64::new(x, y);
        // identical populations, coherences differing by a phase
        let singles: Vec<_> = (0..3)
            .map(|k| {
                let coh = Complex64::from_polar(0.2, 0.7 * k as f64);
                Matrix2::new(c(0.4, 0.0), coh.conj(), coh, c(0.6, 0.0))
            })
            .collect();
        let rho = DensityState::product(&singles).unwrap();
        let a = CoeffMatrix::from_real(Flavor::Total, &DMatrix::identity(3, 3));
        let v = a2_zero_delay(&rho, &a, &a).unwrap().value;
        assert!((v - independent_value(3)).abs() < 1e-12);
        // unequal populations p_μ give 1 − Σp²/(Σp)² instead
        let uneven = DensityState::product(&[
            Matrix2::new(c(0.4, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.0)),
            Matrix2::new(c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0)),
        ])
        .unwrap();
        let a = CoeffMatrix::from_real(Flavor::Total, &DMatrix::identity(2, 2));
        let v = a2_zero_delay(&uneven, &a, &a).unwrap().value;
        assert!((v - (1.0 - (0.36 + 0.01) / 0.49)).abs() < 1e-12);
    }

    #[test]
    fn ground_state_is_undefined() {
        let a = CoeffMatrix::from_real(Flavor::Total, &DMatrix::identity(2, 2));
        let err = a2_zero_delay(&DensityState::ground(2), &a, &a).unwrap_err();
        assert!(matches!(err, Error::UndefinedCorrelation { .. }));
    }

    #[test]
    fn closed_form_lattice_limits() {
        assert_eq!(
            inverted_array_closed_form(&DMatrix::from_element(64, 64, 1.0)),
            1.96875
        );
        assert_eq!(
            inverted_array_closed_form(&DMatrix::identity(64, 64)),
            0.984375
        );
        // coupled lattice lies between the limits
        let lat = build_square_lattice(3, 0.3, Z).unwrap();
        let v = inverted_array_closed_form(&coupling_matrices(&lat).unwrap().gamma);
        assert!(v > independent_value(9) && v < dicke_value(9));
    }

    #[test]
    fn closed_forms_agree_with_operator_path() {
        let array = build_chain(4, 0.23, X, Z).unwrap();
        let c = coupling_matrices(&array).unwrap();
        let rho = DensityState::inverted(4);
        let det = DetectorConfig::new(X, Y, Some(Z), Some(Z)).unwrap();
        for flavor in [
            Flavor::Total,
            Flavor::Directional,
            Flavor::PolarizedDirectional,
        ] {
            let (a, b) = coeff_matrices(&array, &c, flavor, Some(&det)).unwrap();
            let op = a2_zero_delay(&rho, &a, &b).unwrap().value;
            assert!(
                (op - inverted_closed_form(&a, &b).unwrap()).abs() < 1e-12,
                "{flavor:?}"
            );
        }
        let a = CoeffMatrix::from_real(Flavor::Total, &c.gamma);
        let op = a2_zero_delay(&rho, &a, &a).unwrap().value;
        assert!((op - inverted_array_closed_form(&c.gamma)).abs() < 1e-12);
    }

    #[test]
    fn pair_cross_terms() {
        let rho = DensityState::inverted(2);
        let dicke = CoeffMatrix::from_real(Flavor::Total, &DMatrix::from_element(2, 2, 1.0));
        assert_eq!(a2_cross_terms(&rho, &dicke, &dicke).unwrap().value, 2.0);
        let indep = CoeffMatrix::from_real(Flavor::Total, &DMatrix::identity(2, 2));
        assert_eq!(a2_cross_terms(&rho, &indep, &indep).unwrap().value, 1.0);
    }

    #[test]
    fn rescaling_invariance() {
        let rho = generic_state(3, 2);
        let array = build_chain(3, 0.4, X, Z).unwrap();
        let a = CoeffMatrix::from_real(Flavor::Total, &coupling_matrices(&array).unwrap().gamma);
        let v0 = a2_zero_delay(&rho, &a, &a).unwrap().value;
        let v1 = a2_zero_delay(&rho, &a.scaled(3.7), &a.scaled(0.2))
            .unwrap()
            .value;
        assert!((v0 - v1).abs() < 1e-12);
    }

    #[test]
    fn emission_rate_examples() {
        let g = DMatrix::identity(3, 3);
        assert_eq!(emission_rate(&DensityState::inverted(3), &g).unwrap(), 3.0);
        assert_eq!(emission_rate(&DensityState::ground(3), &g).unwrap(), 0.0);
    }

    #[test]
    fn slope_relation_examples() {
        let dicke = slope_relation_from_couplings(&CouplingMatrices::dicke(2)).unwrap();
        assert!(dicke.lhs.abs() < 1e-6 && dicke.rhs.abs() < 1e-12);
        let close = slope_relation_check(&build_chain(3, 0.05, X, Z).unwrap(), None).unwrap();
        assert!(close.relative_discrepancy() < 1e-4, "{close:?}");
        let far = slope_relation_check(&build_chain(4, 2.0, X, Z).unwrap(), None).unwrap();
        assert!(far.lhs < 0.0);
        let drive = DriveParams::resonant(1.0).unwrap();
        assert!(matches!(
            slope_relation_check(&build_chain(2, 0.3, X, Z).unwrap(), Some(&drive)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn far_field_examples() {
        let pair = build_chain(2, 1.0, X, Z).unwrap();
        assert!((far_field_inverted_g2(&pair, &X, &X).unwrap() - 1.0).abs() < 1e-14);
        assert!((far_field_inverted_g2(&pair, &X, &Y).unwrap() - 1.0).abs() < 1e-12);
        // opposite directions across λ/2: (r̂_a − r̂_b)·R = λ, still maximal
        let half = build_chain(2, 0.5, X, Z).unwrap();
        assert!((far_field_inverted_g2(&half, &X, &[-1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        let off = build_chain(2, 0.3, X, Z).unwrap();
        assert!(far_field_inverted_g2(&off, &X, &[-1.0, 0.0, 0.0]).unwrap() < 1.0 - 1e-9);
        let chain = build_chain(5, 0.31, X, Z).unwrap();
        let v = far_field_inverted_g2(&chain, &Y, &Y).unwrap();
        assert!((v - dicke_value(5)).abs() < 1e-12);
        let mixed = EmitterArray::new(vec![[0.0; 3], [0.5, 0.0, 0.0]], vec![Z, X]).unwrap();
        assert!(far_field_inverted_g2(&mixed, &X, &Y).is_err());
    }

    #[test]
    fn far_field_matches_directional_operator_path() {
        let chain = build_chain(4, 0.37, [0.6, 0.0, 0.8], Z).unwrap();
        let (da, db) = ([0.0, 0.6, 0.8], [1.0, 0.0, 0.0]);
        let a = detector_coeff_matrix(&chain, &da, None);
        let b = detector_coeff_matrix(&chain, &db, None);
        let op = a2_zero_delay(&DensityState::inverted(4), &a, &b)
            .unwrap()
            .value;
        let cf = far_field_inverted_g2(&chain, &da, &db).unwrap();
        assert!((op - cf).abs() < 1e-12, "{op} {cf}");
    }
}
