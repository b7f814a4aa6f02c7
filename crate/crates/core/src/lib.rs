//! Simulation and analysis toolkit for polarization-entangled biphotons
//! produced by mapping a two-dimensional OAM subspace onto polarization.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] – small dense Hermitian linear algebra (Jacobi eigensolver,
//!   Cholesky, real linear solves).
//! * [`quantum`] – two-qubit kets, density matrices, fidelity and CHSH.
//! * [`tomography`] – linear-inversion and maximum-likelihood reconstruction
//!   from the sixteen joint projection settings.
//! * [`coincidence`] – coincidence histograms: synthesis, ingestion,
//!   background normalisation and Monte Carlo error propagation.
//! * [`oam`] – fork-hologram diffraction, etalon filtering and PBS
//!   recombination of the OAM biphoton state.
//! * [`holograms`] – SLM phase masks and their PGM/PNG export.
//!
//! Interchangeable algorithms (reconstruction methods, Monte Carlo
//! resampling rules, hologram patterns) are registered by name in a
//! [`registry::Registry`] so callers can pick them at runtime.

pub mod coincidence;
pub mod error;
pub mod holograms;
pub mod linalg;
pub mod oam;
pub mod quantum;
pub mod registry;
pub mod seed;
pub mod tomography;
pub mod uncertainty;

pub use error::{Error, Result};
pub use quantum::{BellState, DensityMatrix, MeasurementSetting, PhotonBasis, TwoQubitKet};
