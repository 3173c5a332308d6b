//! Second-order photon correlations of dipole emitter arrays.
//!
//! Lengths are in units of the transition wavelength λ and rates in units of
//! the single-emitter decay rate γ₀. The pieces:
//!
//! - [`geometry`]: emitter positions, dipoles, drive and detector settings.
//! - [`em_env`]: free-space couplings γ and Δ, and the detection coefficient
//!   matrices for each correlation flavor.
//! - [`quantum`]: density matrices on the 2^N register, the Liouvillian,
//!   time evolution and steady states.
//! - [`correlations`]: zero-delay g⁽²⁾ from a state, plus the closed form for
//!   a fully inverted array.
//! - [`sampling`]: m-wise and pairwise estimators over random sub-clusters.
//! - [`scenario`] and [`harness`]: JSON run configs, sweeps, error scans and
//!   the files the `superrad` binary writes.
//!
//! ```
//! use superrad::geometry::build_chain;
//! use superrad::scenario::Scenario;
//!
//! let chain = build_chain(4, 0.3, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
//! let s = Scenario::inverted(chain);
//! let exact = s.evaluate().unwrap().value;
//! assert!((exact - s.closed_form().unwrap()).abs() < 1e-10);
//! ```

// index loops read closer to the tensor notation in the numerics, and the
// negated float comparisons are there so NaN fails validation
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod correlations;
pub mod em_env;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod quantum;
pub mod sampling;
pub mod scenario;

pub use error::{Error, Result};
