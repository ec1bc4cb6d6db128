//! Monte Carlo simulator and analysis toolkit for surface-code based
//! long-distance entanglement generation on a two-dimensional quantum
//! network.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] builds the rectangular network section (and the periodic
//!   block used for bulk threshold studies) and exposes each error sector
//!   as a [`topology::SectorLayout`].
//! * [`noise`] holds the physical and phenomenological noise parameters, the
//!   per-round error sampler and the circuit-level fault counting that
//!   re-derives the phenomenological rates.
//! * [`protocol`] runs the repeated stabilizer rounds in the Pauli frame and
//!   turns the syndrome history into space-time detection events.
//! * [`decoder`] pairs detection events with an exact minimum-weight perfect
//!   matching and evaluates the residual logical error.
//! * [`analysis`] wraps everything into seeded Monte Carlo batches, threshold
//!   location and fitting, and the closed-form fidelity and rate models.
//! * [`config`] parses the flat key-value run configuration used by the CLI.

pub mod analysis;
pub mod config;
pub mod decoder;
mod error;
pub mod noise;
pub mod protocol;
pub mod topology;

pub use error::{Error, Result};
