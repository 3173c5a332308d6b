use faer::linalg::solvers::SolveCore;
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Capacity, DensityState, Liouvillian};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SteadyStateSolver {
    /// Direct factorization below 6 emitters; restarted GMRES from 6 up,
    /// retried with the direct solver if it stalls.
    #[default]
    Auto,
    /// Sparse LU of the bordered system.
    Direct,
    /// Jacobi-preconditioned restarted GMRES on the bordered system.
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateOptions {
    pub solver: SteadyStateSolver,
    pub capacity: Capacity,
    /// Bound on `‖L vec(ρ)‖₂` for the accepted state.
    pub residual_tol: f64,
    /// Relative residual target of the iterative solver.
    pub gmres_tol: f64,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions {
            solver: SteadyStateSolver::Auto,
            capacity: Capacity::default(),
            residual_tol: 1e-9,
            gmres_tol: 1e-13,
            gmres_restart: 80,
            gmres_max_iter: 20_000,
        }
    }
}

const AUTO_ITERATIVE_FROM: usize = 6;
/// Liouville dimensions up to this size get exact singular values in
/// degeneracy reports.
const DENSE_SVD_MAX: usize = 1024;
const POSITIVITY_TOL: f64 = 1e-8;
const SINGULAR_REL_TOL: f64 = 1e-10;

/// Unique stationary state of `L`.
pub fn steady_state(l: &Liouvillian) -> Result<DensityState> {
    steady_state_with(l, &SteadyStateOptions::default())
}

/// The linear system `L vec(ρ) = 0` with its first row replaced by the trace
/// condition `Σ_i ρ_ii = 1`.
pub fn steady_state_with(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<DensityState> {
    opts.capacity.check_steady_state(l.n())?;
    let x = match opts.solver {
        SteadyStateSolver::Auto if l.n() >= AUTO_ITERATIVE_FROM => match solve_iterative(l, opts) {
            Ok(x) => x,
            Err(_) => solve_direct(l)?,
        },
        SteadyStateSolver::Iterative => solve_iterative(l, opts)?,
        _ => solve_direct(l)?,
    };
    accept(l, x, opts)
}

fn bordered_triplets(l: &Liouvillian) -> Vec<Triplet<usize, usize, Complex64>> {
    let dim = l.hilbert_dim();
    let mut t: Vec<_> = l.triplets().into_iter().filter(|t| t.row != 0).collect();
    t.extend((0..dim).map(|i| Triplet::new(0, i + i * dim, Complex64::new(1.0, 0.0))));
    t
}

fn solve_direct(l: &Liouvillian) -> Result<Vec<Complex64>> {
    let n = l.dim();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &bordered_triplets(l))
        .expect("in-range triplets");
    let lu = a.sp_lu().map_err(|e| Error::Degenerate {
        reason: format!("sparse LU of the bordered system failed: {e:?}"),
        singular_values: dense_singular_values(l),
    })?;
    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    rhs[(0, 0)] = Complex64::new(1.0, 0.0);
    lu.solve_in_place(rhs.as_mut());
    let x: Vec<Complex64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::Degenerate {
            reason: "bordered system is singular".into(),
            singular_values: dense_singular_values(l),
        });
    }

    // Inverse iteration on AᴴA for the smallest singular value of the
    // bordered matrix; a second stationary direction makes it vanish.
    let scale = l.diagonal().iter().map(|d| d.norm()).fold(1.0, f64::max);
    let mut v = Mat::<Complex64>::from_fn(n, 1, |i, _| {
        Complex64::new(
            1.0 + ((i * 7919) % 13) as f64 / 13.0,
            ((i * 104729) % 7) as f64 / 7.0,
        )
    });
    let mut sigma_min = f64::INFINITY;
    for _ in 0..6 {
        let norm = v.norm_l2();
        v /= Scale(Complex64::new(norm, 0.0));
        lu.solve_transpose_in_place_with_conj(Conj::Yes, v.as_mut());
        lu.solve_in_place(v.as_mut());
        let growth = v.norm_l2();
        if !growth.is_finite() {
            sigma_min = 0.0;
            break;
        }
        sigma_min = 1.0 / growth.sqrt();
    }
    if sigma_min < SINGULAR_REL_TOL * scale {
        return Err(Error::Degenerate {
            reason: format!(
                "bordered system is numerically singular (smallest singular value ≈ {sigma_min:e})"
            ),
            singular_values: dense_singular_values(l),
        });
    }
    Ok(x)
}

/// Restarted GMRES with right Jacobi preconditioning.
fn solve_iterative(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<Vec<Complex64>> {
    let hdim = l.hilbert_dim();
    let n = l.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut diag = l.diagonal();
    diag[0] = Complex64::new(1.0, 0.0);
    let inv_diag: Vec<Complex64> = diag
        .iter()
        .map(|d| {
            if d.norm() > 1e-14 {
                1.0 / d
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    let apply_bordered = |x: &[Complex64], out: &mut [Complex64]| {
        l.apply(x, out);
        out[0] = (0..hdim).map(|i| x[i + i * hdim]).sum();
    };

    // start from the maximally mixed state
    let mut x = vec![zero; n];
    for i in 0..hdim {
        x[i + i * hdim] = Complex64::new(1.0 / hdim as f64, 0.0);
    }
    let mut b = vec![zero; n];
    b[0] = Complex64::new(1.0, 0.0);
    let m = opts.gmres_restart.max(2);
    let mut tmp = vec![zero; n];
    let mut w = vec![zero; n];
    let mut iterations = 0usize;
    let mut rel = f64::INFINITY;

    while iterations < opts.gmres_max_iter {
        apply_bordered(&x, &mut tmp);
        let r: Vec<Complex64> = b.iter().zip(&tmp).map(|(b, a)| b - a).collect();
        let beta = norm2(&r);
        rel = beta;
        if beta <= opts.gmres_tol {
            return Ok(x);
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut hess: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for j in 0..m {
            iterations += 1;
            for ((t, v), d) in tmp.iter_mut().zip(&basis[j]).zip(&inv_diag) {
                *t = v * d;
            }
            apply_bordered(&tmp, &mut w);
            let mut hcol = vec![zero; j + 2];
            // modified Gram–Schmidt
            for (i, q) in basis.iter().enumerate() {
                let hij: Complex64 = q.iter().zip(&w).map(|(q, w)| q.conj() * w).sum();
                hcol[i] = hij;
                for (wv, qv) in w.iter_mut().zip(q) {
                    *wv -= hij * qv;
                }
            }
            let hnext = norm2(&w);
            hcol[j + 1] = Complex64::new(hnext, 0.0);
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (hcol[i], hcol[i + 1]);
                hcol[i] = c * a + s * bb;
                hcol[i + 1] = -s.conj() * a + c * bb;
            }
            let (a, bb) = (hcol[j], hcol[j + 1]);
            let rho = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if rho == 0.0 {
                (1.0, zero)
            } else if a.norm() == 0.0 {
                (0.0, Complex64::new(1.0, 0.0) * bb.conj() / bb.norm())
            } else {
                let c = a.norm() / rho;
                (c, (a / a.norm()) * bb.conj() / rho)
            };
            hcol[j] = c * a + s * bb;
            hcol[j + 1] = zero;
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            cs.push((c, s));
            hess.push(hcol);
            k_used = j + 1;
            rel = g[j + 1].norm();
            if rel <= opts.gmres_tol || hnext == 0.0 || iterations >= opts.gmres_max_iter {
                break;
            }
            basis.push(w.iter().map(|z| z / hnext).collect());
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for (jj, yj) in y.iter().enumerate().take(k_used).skip(i + 1) {
                acc -= hess[jj][i] * yj;
            }
            y[i] = acc / hess[i][i];
        }
        for (yi, q) in y.iter().zip(&basis) {
            for ((xv, qv), d) in x.iter_mut().zip(q).zip(&inv_diag) {
                *xv += yi * qv * d;
            }
        }
        if rel <= opts.gmres_tol {
            apply_bordered(&x, &mut tmp);
            let true_res = norm2(&b.iter().zip(&tmp).map(|(b, a)| b - a).collect::<Vec<_>>());
            if true_res <= 10.0 * opts.gmres_tol {
                return Ok(x);
            }
        }
    }
    Err(Error::Degenerate {
        reason: format!(
            "GMRES did not converge in {} iterations (relative residual {rel:e})",
            opts.gmres_max_iter
        ),
        singular_values: None,
    })
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn accept(l: &Liouvillian, x: Vec<Complex64>, opts: &SteadyStateOptions) -> Result<DensityState> {
    let hdim = l.hilbert_dim();
    let state = DensityState::cleaned(DMatrix::from_column_slice(hdim, hdim, &x))?;
    let mut lx = vec![Complex64::new(0.0, 0.0); l.dim()];
    l.apply(state.as_vec(), &mut lx);
    let residual = norm2(&lx);
    if !(residual < opts.residual_tol) {
        return Err(Error::Degenerate {
            reason: format!(
                "residual ‖Lρ‖ = {residual:e} exceeds {:e}",
                opts.residual_tol
            ),
            singular_values: dense_singular_values(l),
        });
    }
    let min_ev = state.min_eigenvalue();
    if min_ev < -POSITIVITY_TOL {
        return Err(Error::Degenerate {
            reason: format!("stationary solution is not positive (eigenvalue {min_ev:e})"),
            singular_values: dense_singular_values(l),
        });
    }
    Ok(state)
}

/// Two smallest singular values of `L`, when it is small enough to
/// decompose densely.
fn dense_singular_values(l: &Liouvillian) -> Option<[f64; 2]> {
    let n = l.dim();
    if n > DENSE_SVD_MAX {
        return None;
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for t in l.triplets() {
        m[(t.row, t.col)] += t.val;
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.total_cmp(b));
    Some([sv[0], *sv.get(1).unwrap_or(&f64::NAN)])
}

#[cfg(test)]
mod tests {
    use super::super::{evolve, EvolveOptions};
    use super::*;
    use crate::em_env::{coupling_matrices, CouplingMatrices};
    use crate::geometry::{build_chain, DriveParams};

    #[test]
    fn single_emitter_analytic() {
        // Resonant two-level atom: p_e = (Ω²/4) / (γ²/4 + Ω²/2).
        let rabi = 5.0;
        let drive = DriveParams::resonant(rabi).unwrap();
        let l = Liouvillian::from_phases(&CouplingMatrices::independent(1), Some(&drive), &[0.0])
            .unwrap();
        let want = (rabi * rabi / 4.0) / (0.25 + rabi * rabi / 2.0);
        for solver in [SteadyStateSolver::Direct, SteadyStateSolver::Iterative] {
            let opts = SteadyStateOptions {
                solver,
                ..Default::default()
            };
            let s = steady_state_with(&l, &opts).unwrap();
            assert!((s.populations()[0] - want).abs() < 1e-10, "{solver:?}");
        }
        let late = evolve(
            &DensityState::ground(1),
            &l,
            &[50.0],
            &EvolveOptions::default(),
        )
        .unwrap();
        let s = steady_state(&l).unwrap();
        assert!((late[0].populations()[0] - s.populations()[0]).abs() < 1e-8);
    }

    #[test]
    fn undriven_goes_to_ground() {
        let array = build_chain(3, 0.3, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let c = coupling_matrices(&array).unwrap();
        let l = Liouvillian::from_phases(&c, None, &[0.0; 3]).unwrap();
        let s = steady_state(&l).unwrap();
        assert!(s.trace_distance(&DensityState::ground(3)).unwrap() < 1e-10);
    }

    #[test]
    fn dark_state_is_degenerate() {
        let l = Liouvillian::from_phases(&CouplingMatrices::dicke(2), None, &[0.0; 2]).unwrap();
        let err = steady_state(&l).unwrap_err();
        match err {
            Error::Degenerate {
                singular_values: Some(sv),
                ..
            } => {
                assert!(sv[0] < 1e-12 && sv[1] < 1e-12, "{sv:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solvers_agree_on_driven_chain() {
        let array = build_chain(4, 0.25, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let c = coupling_matrices(&array).unwrap();
        let drive = DriveParams::new(2.0, 0.5, [0.0, 1.0, 0.0], 1.0).unwrap();
        let l = super::super::build_liouvillian(&c, Some(&drive), &array).unwrap();
        let direct = steady_state_with(
            &l,
            &SteadyStateOptions {
                solver: SteadyStateSolver::Direct,
                ..Default::default()
            },
        )
        .unwrap();
        let iter = steady_state_with(
            &l,
            &SteadyStateOptions {
                solver: SteadyStateSolver::Iterative,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(direct.trace_distance(&iter).unwrap() < 1e-9);
    }

    #[test]
    fn capacity_limit() {
        let l =
            Liouvillian::from_phases(&CouplingMatrices::independent(9), None, &[0.0; 9]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::Capacity { .. })));
    }
}
