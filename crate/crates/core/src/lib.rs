//! Gaussian and truncated-Fock dynamics of a cavity mode coupled to a
//! single dipole oscillator, with time-dependent coupling expressed in a
//! continuous family of gauges labelled by α.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod ground_state;
pub mod model;
pub mod observables;
pub mod ode;
pub mod run;
pub mod symplectic;
pub mod transit;

pub use dynamics::{evolve, GaussianState, Mode, TrajectoryRecord, Variant};
pub use error::{Error, Result};
pub use model::{CouplingEnvelope, ModelParams};
