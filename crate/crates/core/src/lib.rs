//! E-optimal sensor selection for compressive spectrum sensing.
//!
//! The crate is organised around the pipeline of a sensing experiment:
//!
//! * [`scenario`] builds the synthetic network (grid, sensors, gains, truth)
//!   and draws noisy measurements.
//! * [`matrixdiag`] computes exact spectral diagnostics by enumeration.
//! * [`selection`] holds the static selectors and the subset-sampling
//!   distributions.
//! * [`recovery`] estimates the sparse power vector from selected sensors.
//! * [`dynamic`] tracks sensor reliability and re-selects online.
//! * [`metrics`] scores estimates and renders reliability maps.
//! * [`experiment`] drives configured sweeps and writes their outputs.

pub mod dynamic;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod matrixdiag;
pub mod metrics;
pub mod recovery;
pub mod scenario;
pub mod seed;
pub mod selection;

#[cfg(test)]
#[path = "../tests/common/oracles.rs"]
mod testutil;

pub use error::{Error, Result};
pub use scenario::GainMatrix;
