use std::io::{Read, Write};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{validation, Error, Result};

/// Density matrix of an `n`-emitter register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    n: usize,
    matrix: DMatrix<Complex64>,
}

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;

impl DensityState {
    /// `|s⟩⟨s|` for basis index `s`.
    pub fn basis(n: usize, s: usize) -> Self {
        let dim = 1usize << n;
        assert!(s < dim, "basis index {s} out of range for {n} emitters");
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix[(s, s)] = Complex64::new(1.0, 0.0);
        DensityState { n, matrix }
    }

    pub fn ground(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Every emitter excited.
    pub fn inverted(n: usize) -> Self {
        Self::basis(n, (1usize << n) - 1)
    }

    /// Tensor product of single-emitter states, each a 2×2 matrix indexed
    /// `0 = ground`, `1 = excited`.
    pub fn product(singles: &[Matrix2<Complex64>]) -> Result<Self> {
        let n = singles.len();
        if n == 0 {
            return Err(validation("product state needs at least one factor"));
        }
        let dim = 1usize << n;
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            singles
                .iter()
                .enumerate()
                .map(|(mu, s)| s[((r >> mu) & 1, (c >> mu) & 1)])
                .product()
        });
        let state = DensityState { n, matrix };
        state.check()?;
        Ok(state)
    }

    /// Wraps a matrix after checking the density-matrix invariants.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let state = Self::from_matrix_unchecked(matrix)?;
        state.check()?;
        Ok(state)
    }

    /// Wraps a matrix checking only that its dimension is a power of two.
    pub fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix shape {:?} is not 2^n square",
                matrix.shape()
            )));
        }
        Ok(DensityState {
            n: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// `(ρ + ρ†)/2`, rescaled to unit trace.
    pub fn cleaned(matrix: DMatrix<Complex64>) -> Result<Self> {
        let herm = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = herm.trace().re;
        if !(tr.abs() > 1e-300) || !tr.is_finite() {
            return Err(validation(format!(
                "cannot normalise a matrix with trace {tr}"
            )));
        }
        Self::from_matrix_unchecked(herm / Complex64::new(tr, 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Column-stacked `vec(ρ)`.
    pub fn as_vec(&self) -> &[Complex64] {
        self.matrix.as_slice()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr[ρ²] = Σ_ij ρ_ij ρ_ji
        let m = &self.matrix;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                acc += m[(i, j)] * m[(j, i)];
            }
        }
        acc.re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Hermiticity, unit trace and positivity within the library tolerances.
    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(validation(format!(
                "density matrix not Hermitian (error {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(validation(format!("density matrix trace {tr} is not 1")));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -POSITIVITY_TOL {
            return Err(validation(format!(
                "density matrix has negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(())
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "trace distance between dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let diff = &self.matrix - &other.matrix;
        let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(0.5
            * herm
                .symmetric_eigenvalues()
                .iter()
                .map(|x| x.abs())
                .sum::<f64>())
    }

    /// Excited-state population of each emitter.
    pub fn populations(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..self.n)
            .map(|mu| {
                (0..dim)
                    .filter(|s| s >> mu & 1 == 1)
                    .map(|s| self.matrix[(s, s)].re)
                    .sum()
            })
            .collect()
    }

    /// Binary snapshot: `dim` as little-endian u64, then the matrix in
    /// row-major order as little-endian `(re, im)` f64 pairs.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        let dim = self.dim();
        out.write_all(&(dim as u64).to_le_bytes())?;
        for r in 0..dim {
            for c in 0..dim {
                let z = self.matrix[(r, c)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut input: R) -> Result<Self> {
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        let dim = u64::from_le_bytes(word) as usize;
        if !dim.is_power_of_two() || dim > 1 << 15 {
            return Err(validation(format!(
                "snapshot dimension {dim} is not a supported 2^n"
            )));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            input.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            input.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            data.push(Complex64::new(re, im));
        }
        Self::from_matrix_unchecked(DMatrix::from_row_slice(dim, dim, &data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverted_and_ground() {
        let s = DensityState::inverted(3);
        assert_eq!(s.dim(), 8);
        assert_eq!(s.matrix()[(7, 7)], c(1.0, 0.0));
        assert_eq!(s.populations(), vec![1.0; 3]);
        assert_eq!(DensityState::ground(2).populations(), vec![0.0; 2]);
        s.check().unwrap();
    }

    #[test]
    fn product_state_matches_kron_order() {
        let excited = Matrix2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let ground = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        // emitter 0 excited, emitter 1 ground -> basis index 0b01
        let s = DensityState::product(&[excited, ground]).unwrap();
        assert_eq!(s.matrix()[(1, 1)], c(1.0, 0.0));
        assert_eq!(s.populations(), vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_matrices() {
        let m = DMatrix::from_element(2, 2, c(0.5, 0.0));
        assert!(DensityState::from_matrix(m).is_ok());
        let neg = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.5, 0.0),
            c(-0.5, 0.0),
        ]));
        assert!(DensityState::from_matrix(neg).is_err());
        assert!(DensityState::from_matrix(DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let mut m = DMatrix::from_element(4, 4, c(0.0, 0.0));
        m[(0, 0)] = c(0.25, 0.0);
        m[(3, 3)] = c(0.75, 0.0);
        m[(0, 3)] = c(0.1, 0.2);
        m[(3, 0)] = c(0.1, -0.2);
        let s = DensityState::from_matrix(m).unwrap();
        let mut buf = Vec::new();
        s.write_snapshot(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16 * 16);
        assert_eq!(&buf[..8], &4u64.to_le_bytes());
        // row-major: element (0,3) is the fourth complex pair
        assert_eq!(&buf[8 + 3 * 16..8 + 3 * 16 + 8], &0.1f64.to_le_bytes());
        let back = DensityState::read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn trace_distance_of_orthogonal_states_is_one() {
        let d = DensityState::ground(2)
            .trace_distance(&DensityState::inverted(2))
            .unwrap();
        assert!((d - 1.0).abs() < 1e-14);
    }
}
