//! Recovery of sparse spike trains driving unknown autoregressive systems
//! from compressed (Toeplitz/circulant) or direct noisy measurements.
//!
//! The pipeline: simulate with [`signal`], measure with [`sensing`], turn
//! the unknown filter into linear unknowns with
//! [`sensing::build_regressor`], solve with [`solvers`] through
//! [`decoder`], and check assumptions and certificates with [`verify`].

pub mod decoder;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sensing;
pub mod signal;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
