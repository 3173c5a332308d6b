use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Capacity, DensityState, Liouvillian};
use crate::error::{validation, Error, Result};

/// Error-control settings for [`evolve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on accepted plus rejected steps over the whole grid.
    pub max_steps: usize,
    pub capacity: Capacity,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 10_000_000,
            capacity: Capacity::default(),
        }
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are
// not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dρ/dt = L ρ` from `ρ(0) = rho0` and returns the state at each
/// time in `t_grid`. Each output is re-Hermitized and trace-normalized.
pub fn evolve(
    rho0: &DensityState,
    l: &Liouvillian,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityState>> {
    opts.capacity.check_evolution(l.n())?;
    if rho0.dim() != l.hilbert_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} but Liouvillian acts on dimension {}",
            rho0.dim(),
            l.hilbert_dim()
        )));
    }
    if t_grid.first().is_some_and(|&t| !(t >= 0.0)) {
        return Err(validation("time grid must start at t >= 0"));
    }
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(validation("time grid must be finite and non-decreasing"));
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(validation("integration tolerances must be positive"));
    }

    let n = l.dim();
    let mut y: Vec<Complex64> = rho0.as_vec().to_vec();
    let mut t = 0.0f64;
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    l.apply(&y, &mut k[0]);
    let mut h = initial_step(l, &y, &k[0], opts);
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(t_grid.len());

    for &t_out in t_grid {
        while t < t_out {
            let remaining = t_out - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            for s in 1..7 {
                stage.copy_from_slice(&y);
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j] * h_try;
                    if a != 0.0 {
                        for (st, kv) in stage.iter_mut().zip(kj) {
                            *st += a * kv;
                        }
                    }
                }
                l.apply(&stage, &mut k[s]);
            }
            // stage 7 evaluated at the fifth-order solution (FSAL), which is
            // exactly the last stage input
            y_new.copy_from_slice(&stage);
            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += E[j] * kj[i];
                    }
                }
                let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y_new[i].norm());
                err_sq += (h_try * e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::IntegrationFailure { t, step: h_try });
            }
            if err <= 1.0 {
                t = if last { t_out } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a truncated final step says nothing about the natural step size
                if !last || h_try * grow > h {
                    h = h_try * grow;
                }
            } else {
                let shrink = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h = h_try * shrink;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::IntegrationFailure { t, step: h });
            }
        }
        let m = DMatrix::from_column_slice(l.hilbert_dim(), l.hilbert_dim(), &y);
        out.push(DensityState::cleaned(m)?);
    }
    Ok(out)
}

/// Starting step from the scaled sizes of `y` and `L y`.
fn initial_step(l: &Liouvillian, y: &[Complex64], f0: &[Complex64], opts: &EvolveOptions) -> f64 {
    let n = y.len() as f64;
    let scaled = |v: &[Complex64]| {
        (v.iter()
            .zip(y)
            .map(|(a, b)| (a.norm() / (opts.abs_tol + opts.rel_tol * b.norm())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = scaled(y);
    let d1 = scaled(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    // one explicit Euler probe of the second derivative
    let y1: Vec<Complex64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![Complex64::new(0.0, 0.0); y.len()];
    l.apply(&y1, &mut f1);
    let diff: Vec<Complex64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em_env::CouplingMatrices;
    use crate::geometry::DriveParams;
    use nalgebra::Matrix2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_emitter_decay() {
        let l = Liouvillian::from_phases(&CouplingMatrices::independent(1), None, &[0.0]).unwrap();
        let times = [0.0, 0.5, 1.0, 3.0, 10.0];
        let states = evolve(
            &DensityState::inverted(1),
            &l,
            &times,
            &EvolveOptions::default(),
        )
        .unwrap();
        for (t, s) in times.iter().zip(&states) {
            let p = s.populations()[0];
            assert!((p - (-t).exp()).abs() < 1e-8, "t={t} p={p}");
        }
    }

    #[test]
    fn zero_liouvillian_is_identity() {
        let zero =
            CouplingMatrices::from_parts(DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)).unwrap();
        let l = Liouvillian::from_phases(&zero, None, &[0.0, 0.0]).unwrap();
        let rho0 = DensityState::product(&[
            Matrix2::new(c(0.3), c(0.2), c(0.2), c(0.7)),
            Matrix2::new(c(0.5), c(0.0), c(0.0), c(0.5)),
        ])
        .unwrap();
        let out = evolve(&rho0, &l, &[0.0, 1.0, 7.0], &EvolveOptions::default()).unwrap();
        for s in out {
            assert!(s.trace_distance(&rho0).unwrap() < 1e-14);
        }
    }

    #[test]
    fn driven_rabi_oscillation() {
        // Undamped resonant drive: population sin²(Ω t / 2).
        let zero =
            CouplingMatrices::from_parts(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
        let drive = DriveParams::resonant(2.0).unwrap();
        let l = Liouvillian::from_phases(&zero, Some(&drive), &[0.0]).unwrap();
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.37).collect();
        let out = evolve(
            &DensityState::ground(1),
            &l,
            &times,
            &EvolveOptions::default(),
        )
        .unwrap();
        for (t, s) in times.iter().zip(out) {
            let want = (t * 2.0 / 2.0).sin().powi(2);
            assert!((s.populations()[0] - want).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_bad_grid() {
        let l = Liouvillian::from_phases(&CouplingMatrices::independent(1), None, &[0.0]).unwrap();
        let rho = DensityState::inverted(1);
        assert!(evolve(&rho, &l, &[-1.0], &EvolveOptions::default()).is_err());
        assert!(evolve(&rho, &l, &[2.0, 1.0], &EvolveOptions::default()).is_err());
        assert!(evolve(
            &DensityState::inverted(2),
            &l,
            &[1.0],
            &EvolveOptions::default()
        )
        .is_err());
    }

    #[test]
    fn step_underflow_reports_time() {
        let l = Liouvillian::from_phases(&CouplingMatrices::independent(1), None, &[0.0]).unwrap();
        let opts = EvolveOptions {
            rel_tol: 1e-30,
            abs_tol: 1e-300,
            max_steps: 1000,
            ..EvolveOptions::default()
        };
        let err = evolve(&DensityState::inverted(1), &l, &[1.0], &opts).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }));
    }
}
