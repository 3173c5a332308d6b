//! Exact open-system dynamics for small emitter registers.
//!
//! Basis convention: a register of `n` emitters has dimension `2^n`; bit `μ`
//! of a basis index is set when emitter `μ` is excited. Density matrices are
//! stored column-major, so their raw storage is the column-stacked
//! `vec(ρ)` on which the Liouvillian acts.

mod evolve;
mod liouvillian;
mod ops;
mod state;
mod steady;

pub use evolve::{evolve, EvolveOptions};
pub(crate) use liouvillian::build_liouvillian_with;
pub use liouvillian::{build_liouvillian, Liouvillian};
pub use ops::{embed_ladder, expectation, Ladder, OperatorSpec};
pub use state::DensityState;
pub use steady::{steady_state, steady_state_with, SteadyStateOptions, SteadyStateSolver};

use crate::error::{Error, Result};

/// Largest registers the exact solvers accept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capacity {
    pub evolution: usize,
    pub steady_state: usize,
}

impl Default for Capacity {
    fn default() -> Self {
        Capacity {
            evolution: 12,
            steady_state: 8,
        }
    }
}

impl Capacity {
    /// Lifts both limits up to what a `usize` basis index can address.
    pub fn unsafe_dims() -> Self {
        Capacity {
            evolution: 30,
            steady_state: 15,
        }
    }

    pub fn check_evolution(&self, n: usize) -> Result<()> {
        check(n, self.evolution, "evolution")
    }

    pub fn check_steady_state(&self, n: usize) -> Result<()> {
        check(n, self.steady_state, "steady-state")
    }
}

fn check(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit {
        return Err(Error::Capacity {
            n,
            limit,
            dim: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
            what,
        });
    }
    Ok(())
}
