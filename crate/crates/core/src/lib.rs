//! Bohmian trajectory simulation in 1+1-dimensional Minkowski spacetime.
//!
//! The crate has two dynamical sectors and a statistics layer on top:
//!
//! * [`nr`] — non-relativistic N-particle pilot-wave dynamics (one spatial
//!   dimension per particle) with an exact analytic Gaussian backend and a
//!   periodic-grid split-step backend for external potentials.
//! * [`dirac`] + [`foliation`] + [`hbd`] — free multi-time Dirac wave
//!   functions built from exact plane-wave modes, spacelike leaves and
//!   foliations of spacetime, and the hypersurface-guided integrator that
//!   produces relativistic Bohmian trajectories leaf by leaf.
//! * [`ensemble`] + [`nolaw`] — Monte Carlo machinery over trajectory
//!   ensembles: equivariance and cross-foliation experiments, event
//!   probabilities, and the lower-probability set function obtained by
//!   taking the infimum over a finite foliation family.
//!
//! The CLI in `src/main.rs` drives batch experiments from TOML configs; see
//! [`config`] for the schema.

pub mod config;
pub mod dirac;
pub mod ensemble;
pub mod error;
pub mod event;
pub mod foliation;
pub mod hbd;
pub mod nolaw;
pub mod nr;
pub mod presets;
pub mod report;
pub mod rng;
pub mod spacetime;
pub mod stats;

pub use error::{Result, SimError};
pub use spacetime::{PoincareTransform, TwoVector};
