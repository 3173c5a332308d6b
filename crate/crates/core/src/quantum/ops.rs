use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use super::{Capacity, DensityState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ladder {
    /// σ⁺ = |e⟩⟨g|
    Raise,
    /// σ⁻ = |g⟩⟨e|
    Lower,
}

impl Ladder {
    /// Action on a basis index: the image index, or `None` when the operator
    /// annihilates the state.
    #[inline]
    pub(crate) fn act(self, emitter: usize, s: usize) -> Option<usize> {
        let bit = 1usize << emitter;
        match self {
            Ladder::Raise if s & bit == 0 => Some(s | bit),
            Ladder::Lower if s & bit != 0 => Some(s & !bit),
            _ => None,
        }
    }
}

/// `σ^±` of emitter `idx`, embedded in an `n`-emitter register.
pub fn embed_ladder(n: usize, idx: usize, kind: Ladder) -> Result<SparseColMat<usize, Complex64>> {
    Capacity::default().check_evolution(n)?;
    if idx >= n {
        return Err(Error::DimensionMismatch(format!(
            "emitter {idx} outside a register of {n}"
        )));
    }
    let dim = 1usize << n;
    let triplets: Vec<_> = (0..dim)
        .filter_map(|s| {
            kind.act(idx, s)
                .map(|r| Triplet::new(r, s, Complex64::new(1.0, 0.0)))
        })
        .collect();
    Ok(SparseColMat::try_new_from_triplets(dim, dim, &triplets).expect("valid triplets"))
}

/// An ordered product of ladder operators, leftmost factor first, e.g.
/// `σ⁺_μ σ⁺_ν σ⁻_γ σ⁻_ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorSpec {
    factors: Vec<(usize, Ladder)>,
}

impl OperatorSpec {
    pub fn new(factors: Vec<(usize, Ladder)>) -> Self {
        OperatorSpec { factors }
    }

    /// `σ⁺_μ σ⁻_ν`
    pub fn raise_lower(mu: usize, nu: usize) -> Self {
        OperatorSpec::new(vec![(mu, Ladder::Raise), (nu, Ladder::Lower)])
    }

    /// `σ⁺_μ σ⁺_ν σ⁻_γ σ⁻_ε`
    pub fn normal_ordered_pair(mu: usize, nu: usize, gamma: usize, eps: usize) -> Self {
        OperatorSpec::new(vec![
            (mu, Ladder::Raise),
            (nu, Ladder::Raise),
            (gamma, Ladder::Lower),
            (eps, Ladder::Lower),
        ])
    }

    pub fn factors(&self) -> &[(usize, Ladder)] {
        &self.factors
    }

    /// Image of basis state `s` under the whole product.
    pub(crate) fn act(&self, s: usize) -> Option<usize> {
        self.factors
            .iter()
            .rev()
            .try_fold(s, |acc, &(mu, kind)| kind.act(mu, acc))
    }
}

/// `Tr[O ρ]` for the product `O` described by `spec`.
pub fn expectation(rho: &DensityState, spec: &OperatorSpec) -> Result<Complex64> {
    if let Some(&(bad, _)) = spec.factors.iter().find(|(mu, _)| *mu >= rho.n()) {
        return Err(Error::DimensionMismatch(format!(
            "operator acts on emitter {bad} of a {}-emitter register",
            rho.n()
        )));
    }
    // O is a partial permutation with unit entries: Tr[Oρ] = Σ_b ρ[b, O(b)].
    let m = rho.matrix();
    Ok((0..rho.dim())
        .filter_map(|b| spec.act(b).map(|ob| m[(b, ob)]))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &SparseColMat<usize, Complex64>) -> nalgebra::DMatrix<Complex64> {
        let d = m.to_dense();
        nalgebra::DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| d[(i, j)])
    }

    #[test]
    fn single_raise() {
        let up = dense(&embed_ladder(1, 0, Ladder::Raise).unwrap());
        // |e⟩⟨g|: row 1 (excited), column 0 (ground)
        assert_eq!(up[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(up.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn ladder_algebra() {
        for n in 1..=4 {
            for mu in 0..n {
                let up = dense(&embed_ladder(n, mu, Ladder::Raise).unwrap());
                assert!((&up * &up).iter().all(|z| z.norm() == 0.0));
                for nu in 0..n {
                    if nu == mu {
                        continue;
                    }
                    let down = dense(&embed_ladder(n, nu, Ladder::Lower).unwrap());
                    let comm = &down * &up - &up * &down;
                    assert!(comm.iter().all(|z| z.norm() == 0.0));
                }
            }
        }
    }

    #[test]
    fn capacity_and_range_errors() {
        assert!(matches!(
            embed_ladder(13, 0, Ladder::Raise),
            Err(Error::Capacity { .. })
        ));
        assert!(embed_ladder(2, 2, Ladder::Raise).is_err());
    }

    #[test]
    fn expectation_matches_dense_product() {
        let n = 3;
        // a generic Hermitian positive state
        let dim = 8;
        let a = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                ((i + 2 * j) % 3) as f64 - 1.0,
            )
        });
        let rho_m = &a * a.adjoint();
        let tr = rho_m.trace();
        let rho = DensityState::from_matrix(rho_m / tr).unwrap();
        let spec = OperatorSpec::normal_ordered_pair(0, 2, 1, 2);
        let mut op = nalgebra::DMatrix::<Complex64>::identity(dim, dim);
        for &(mu, kind) in spec.factors() {
            op *= dense(&embed_ladder(n, mu, kind).unwrap());
        }
        let direct = (op * rho.matrix()).trace();
        let fast = expectation(&rho, &spec).unwrap();
        assert!((direct - fast).norm() < 1e-14);
    }

    #[test]
    fn inverted_and_ground_expectations() {
        let n = 3;
        let inv = DensityState::inverted(n);
        for mu in 0..n {
            for nu in 0..n {
                let v = expectation(&inv, &OperatorSpec::raise_lower(mu, nu)).unwrap();
                assert_eq!(v.re, if mu == nu { 1.0 } else { 0.0 });
                for g in 0..n {
                    for e in 0..n {
                        let v = expectation(&inv, &OperatorSpec::normal_ordered_pair(mu, nu, g, e))
                            .unwrap();
                        let mut want = 0.0;
                        if mu != nu {
                            want +=
                                ((mu == g && nu == e) as u8 + (nu == g && mu == e) as u8) as f64;
                        }
                        assert_eq!(v.re, want, "{mu}{nu}{g}{e}");
                    }
                }
            }
        }
        let ground = DensityState::ground(n);
        let v = expectation(&ground, &OperatorSpec::normal_ordered_pair(0, 1, 1, 0)).unwrap();
        assert_eq!(v.norm(), 0.0);
    }
}
