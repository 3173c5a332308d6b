use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{Capacity, DensityState};
use crate::em_env::CouplingMatrices;
use crate::error::{Error, Result};
use crate::geometry::{DriveParams, EmitterArray};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Registers with at least this Hilbert dimension apply the Liouvillian in
/// parallel over density-matrix columns.
const PARALLEL_DIM: usize = 64;

/// Compressed-row storage for the effective Hamiltonian.
#[derive(Clone, Debug)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr {
            row_ptr,
            cols,
            vals,
        }
    }

    #[inline]
    fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }
}

/// Generator of the master equation `dρ/dt = L ρ`.
///
/// Internally `L ρ = −i(H_eff ρ − ρ H_eff†) + Σ_μν γ_μν σ⁻_μ ρ σ⁺_ν` with
/// `H_eff = H − (i/2) Σ_μν γ_μν σ⁺_ν σ⁻_μ`. The superoperator is applied
/// matrix-free; [`Liouvillian::to_sparse`] assembles it explicitly in the
/// column-stacking convention `vec(ρ)[r + c·dim] = ρ[r, c]`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    n: usize,
    dim: usize,
    heff: Csr,
    gamma: DMatrix<f64>,
    couplings: CouplingMatrices,
    drive: Option<DriveParams>,
}

/// Assembles the Liouvillian for `array` with the given couplings and
/// optional coherent drive.
pub fn build_liouvillian(
    couplings: &CouplingMatrices,
    drive: Option<&DriveParams>,
    array: &EmitterArray,
) -> Result<Liouvillian> {
    build_liouvillian_with(couplings, drive, array, &Capacity::default())
}

pub(crate) fn build_liouvillian_with(
    couplings: &CouplingMatrices,
    drive: Option<&DriveParams>,
    array: &EmitterArray,
    capacity: &Capacity,
) -> Result<Liouvillian> {
    let n = array.len();
    if couplings.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "couplings are {0}×{0} but the array has {n} emitters",
            couplings.len()
        )));
    }
    capacity.check_evolution(n)?;
    let phases: Vec<f64> = match drive {
        Some(d) => array.positions().iter().map(|p| d.phase_at(p)).collect(),
        None => vec![0.0; n],
    };
    Ok(Liouvillian::assemble(couplings, drive, &phases))
}

impl Liouvillian {
    /// Builds from couplings and explicit per-emitter drive phases `φ_μ`.
    pub fn from_phases(
        couplings: &CouplingMatrices,
        drive: Option<&DriveParams>,
        phases: &[f64],
    ) -> Result<Self> {
        if phases.len() != couplings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} drive phases for {} emitters",
                phases.len(),
                couplings.len()
            )));
        }
        Capacity::default().check_evolution(phases.len())?;
        Ok(Self::assemble(couplings, drive, phases))
    }

    fn assemble(couplings: &CouplingMatrices, drive: Option<&DriveParams>, phases: &[f64]) -> Self {
        let n = couplings.len();
        let dim = 1usize << n;
        let gamma = &couplings.gamma;
        let delta = &couplings.delta;
        let (rabi, detuning) = drive.map_or((0.0, 0.0), |d| (d.rabi(), d.detuning()));
        let mut entries = Vec::new();
        for c in 0..dim {
            let mut diag = Complex64::new(detuning * c.count_ones() as f64, 0.0);
            for mu in (0..n).filter(|mu| c >> mu & 1 == 1) {
                diag -= 0.5 * I * gamma[(mu, mu)];
            }
            entries.push((c, c, diag));
            // σ⁺_μ σ⁻_ν hopping, μ ≠ ν
            for nu in (0..n).filter(|nu| c >> nu & 1 == 1) {
                for mu in (0..n).filter(|&mu| mu != nu && c >> mu & 1 == 0) {
                    let amp = delta[(mu, nu)] - 0.5 * I * gamma[(mu, nu)];
                    if amp != ZERO {
                        entries.push((c & !(1 << nu) | 1 << mu, c, amp));
                    }
                }
            }
            if rabi != 0.0 {
                for (mu, &phi) in phases.iter().enumerate() {
                    let bit = 1usize << mu;
                    if c & bit == 0 {
                        entries.push((c | bit, c, -0.5 * rabi * Complex64::from_polar(1.0, -phi)));
                    } else {
                        entries.push((c & !bit, c, -0.5 * rabi * Complex64::from_polar(1.0, phi)));
                    }
                }
            }
        }
        Liouvillian {
            n,
            dim,
            heff: Csr::from_triplets(dim, entries),
            gamma: gamma.clone(),
            couplings: couplings.clone(),
            drive: drive.cloned(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Hilbert-space dimension `2^n`.
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    /// Liouville-space dimension `4^n`.
    pub fn dim(&self) -> usize {
        self.dim * self.dim
    }

    pub fn couplings(&self) -> &CouplingMatrices {
        &self.couplings
    }

    pub fn drive(&self) -> Option<&DriveParams> {
        self.drive.as_ref()
    }

    /// `out = L x` on column-stacked vectors of length `4^n`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim;
        assert_eq!(x.len(), dim * dim);
        assert_eq!(out.len(), dim * dim);
        if dim >= PARALLEL_DIM {
            out.par_chunks_mut(dim)
                .enumerate()
                .for_each(|(c, col)| self.apply_column(x, c, col));
        } else {
            out.chunks_mut(dim)
                .enumerate()
                .for_each(|(c, col)| self.apply_column(x, c, col));
        }
    }

    /// Column `c` of `L ρ`.
    fn apply_column(&self, x: &[Complex64], c: usize, out: &mut [Complex64]) {
        let dim = self.dim;
        let col = &x[c * dim..(c + 1) * dim];
        // −i H_eff ρ[:, c]
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (k, h) in self.heff.row(r) {
                acc += h * col[k];
            }
            *o = -I * acc;
        }
        // +i (ρ H_eff†)[:, c] = +i Σ_k ρ[:, k] conj(H_eff[c, k])
        for (k, h) in self.heff.row(c) {
            let w = I * h.conj();
            let src = &x[k * dim..(k + 1) * dim];
            for (o, s) in out.iter_mut().zip(src) {
                *o += w * s;
            }
        }
        // Σ γ_μν σ⁻_μ ρ σ⁺_ν: ρ[r|μ, c|ν] feeds (r, c) for μ ∉ r, ν ∉ c
        for nu in (0..self.n).filter(|nu| c >> nu & 1 == 0) {
            let src = &x[(c | 1 << nu) * dim..((c | 1 << nu) + 1) * dim];
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = ZERO;
                for mu in (0..self.n).filter(|mu| r >> mu & 1 == 0) {
                    let g = self.gamma[(mu, nu)];
                    if g != 0.0 {
                        acc += g * src[r | 1 << mu];
                    }
                }
                *o += acc;
            }
        }
    }

    /// `L ρ` as a matrix.
    pub fn apply_to(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        self.apply(rho.as_slice(), out.as_mut_slice());
        out
    }

    /// Diagonal of the superoperator.
    pub(crate) fn diagonal(&self) -> Vec<Complex64> {
        let dim = self.dim;
        let hdiag: Vec<Complex64> = (0..dim)
            .map(|r| {
                self.heff
                    .row(r)
                    .filter(|&(k, _)| k == r)
                    .map(|(_, h)| h)
                    .sum()
            })
            .collect();
        let mut d = Vec::with_capacity(dim * dim);
        for c in 0..dim {
            for r in 0..dim {
                d.push(-I * (hdiag[r] - hdiag[c].conj()));
            }
        }
        d
    }

    /// Explicit superoperator triplets `(row, col, value)`; duplicates are
    /// left for the consumer to sum.
    pub(crate) fn triplets(&self) -> Vec<Triplet<usize, usize, Complex64>> {
        let dim = self.dim;
        let mut t = Vec::new();
        for r in 0..dim {
            for (k, h) in self.heff.row(r) {
                // −i H_eff ⊗ identity on the column index
                for c in 0..dim {
                    t.push(Triplet::new(r + c * dim, k + c * dim, -I * h));
                }
                // +i ρ H_eff†: row r of H_eff read as (c = r, k)
                for rr in 0..dim {
                    t.push(Triplet::new(rr + r * dim, rr + k * dim, I * h.conj()));
                }
            }
        }
        for c in 0..dim {
            for nu in (0..self.n).filter(|nu| c >> nu & 1 == 0) {
                for r in 0..dim {
                    for mu in (0..self.n).filter(|mu| r >> mu & 1 == 0) {
                        let g = self.gamma[(mu, nu)];
                        if g != 0.0 {
                            t.push(Triplet::new(
                                r + c * dim,
                                (r | 1 << mu) + (c | 1 << nu) * dim,
                                Complex64::new(g, 0.0),
                            ));
                        }
                    }
                }
            }
        }
        t
    }

    /// The superoperator as an explicit sparse matrix.
    pub fn to_sparse(&self) -> SparseColMat<usize, Complex64> {
        let n = self.dim();
        SparseColMat::try_new_from_triplets(n, n, &self.triplets()).expect("in-range triplets")
    }

    /// Largest `|Tr[L e_j]|` over Liouville basis vectors, a direct probe of
    /// trace preservation.
    pub fn trace_defect(&self) -> f64 {
        let dim = self.dim;
        let mut colsum = vec![ZERO; dim * dim];
        for t in self.triplets() {
            let (r, c) = (t.row % dim, t.row / dim);
            if r == c {
                colsum[t.col] += t.val;
            }
        }
        colsum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `L ρ` for a [`DensityState`].
    pub fn act(&self, rho: &DensityState) -> DMatrix<Complex64> {
        self.apply_to(rho.matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em_env::coupling_matrices;
    use crate::geometry::build_chain;

    fn rand_matrix(dim: usize, seed: u64) -> DMatrix<Complex64> {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        DMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()))
    }

    fn chain_l(n: usize, d: f64, rabi: f64) -> Liouvillian {
        let array = build_chain(n, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let c = coupling_matrices(&array).unwrap();
        let drive = DriveParams::new(rabi, 0.3, [0.6, 0.8, 0.0], 1.0).unwrap();
        build_liouvillian(&c, Some(&drive), &array).unwrap()
    }

    #[test]
    fn trace_preserving() {
        let l = chain_l(3, 0.27, 1.7);
        assert!(l.trace_defect() < 1e-10);
        let rho = rand_matrix(8, 3);
        let out = l.apply_to(&rho);
        assert!(out.trace().norm() < 1e-10);
    }

    #[test]
    fn sparse_matches_matrix_free() {
        for (n, d) in [(2, 0.4), (3, 0.15), (4, 0.6)] {
            let l = chain_l(n, d, 2.5);
            let dim = 1 << n;
            let rho = rand_matrix(dim, 11 + n as u64);
            let free = l.apply_to(&rho);
            let sp = l.to_sparse().to_dense();
            let x = rho.as_slice();
            for i in 0..dim * dim {
                let mut acc = ZERO;
                for j in 0..dim * dim {
                    acc += sp[(i, j)] * x[j];
                }
                assert!((acc - free.as_slice()[i]).norm() < 1e-12, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn matches_dense_master_equation() {
        // Oracle: the Lindblad form written out with dense ladder matrices.
        let n = 3;
        let dim = 8;
        let array = build_chain(n, 0.3, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let c = coupling_matrices(&array).unwrap();
        let drive = DriveParams::new(1.3, -0.4, [1.0, 0.0, 0.0], 1.0).unwrap();
        let l = build_liouvillian(&c, Some(&drive), &array).unwrap();
        let lower: Vec<DMatrix<Complex64>> = (0..n)
            .map(|mu| {
                DMatrix::from_fn(dim, dim, |r, s| {
                    if s >> mu & 1 == 1 && r == s & !(1 << mu) {
                        Complex64::new(1.0, 0.0)
                    } else {
                        ZERO
                    }
                })
            })
            .collect();
        let raise: Vec<_> = lower.iter().map(|m| m.adjoint()).collect();
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for mu in 0..n {
            h += &raise[mu] * &lower[mu] * Complex64::from(drive.detuning());
            let phi = drive.phase_at(&array.positions()[mu]);
            let x = &raise[mu] * Complex64::from_polar(drive.rabi(), -phi);
            h -= (&x + x.adjoint()) * Complex64::from(0.5);
            for nu in 0..n {
                if mu != nu {
                    h += &raise[mu] * &lower[nu] * Complex64::from(c.delta[(mu, nu)]);
                }
            }
        }
        let rho = rand_matrix(dim, 99);
        let mut want = (&h * &rho - &rho * &h) * (-I);
        for mu in 0..n {
            for nu in 0..n {
                let g = Complex64::from(c.gamma[(mu, nu)]);
                let pn = &raise[nu] * &lower[mu];
                want += (&lower[mu] * &rho * &raise[nu]
                    - (&pn * &rho + &rho * &pn) * Complex64::from(0.5))
                    * g;
            }
        }
        let got = l.apply_to(&rho);
        assert!((got - want).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn diagonal_matches_sparse() {
        let l = chain_l(3, 0.2, 1.0);
        let sp = l.to_sparse().to_dense();
        for (i, d) in l.diagonal().iter().enumerate() {
            assert!((sp[(i, i)] - d).norm() < 1e-13);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let array = build_chain(3, 0.2, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        let c = CouplingMatrices::independent(2);
        assert!(matches!(
            build_liouvillian(&c, None, &array),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
