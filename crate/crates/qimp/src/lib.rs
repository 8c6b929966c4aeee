//! Quantum image processing toolkit built on a dense statevector simulator.
//!
//! The crate provides image-to-state encodings, a Hadamard-based quantum
//! edge detector, configurable Pauli/depolarizing noise with a
//! density-matrix cross-check, quantum kernel methods with a small SVM
//! trainer, classical baselines, and end-to-end experiment drivers.

pub mod classical;
pub mod encode;
pub mod error;
pub mod noise;
pub mod pipeline;
pub mod qhed;
pub mod qkernel;
pub mod simcore;

pub use error::{Error, Result};
