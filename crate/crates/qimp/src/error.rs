//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Qubit count outside the supported 1..=24 range.
    #[error("qubit count {0} outside supported range 1..=24")]
    Capacity(usize),

    /// A gate matrix failed the unitarity check.
    #[error("gate matrix is not unitary (max |U\u{2020}U - I| = {0:.3e})")]
    NonUnitary(f64),

    /// A gate references a qubit the state does not have, or repeats a target.
    #[error("invalid target qubit {target} for {n_qubits}-qubit state")]
    InvalidTarget { target: usize, n_qubits: usize },

    /// A parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Post-selected branch carries (near-)zero probability.
    #[error("postselection branch probability {0:.3e} is below 1e-12")]
    DegeneratePostselection(f64),

    /// All-zero image: amplitude normalization is undefined.
    #[error("image norm is zero; amplitude encoding undefined")]
    ZeroNorm,

    /// Image or matrix dimensions do not fit the operation.
    #[error("shape error: {0}")]
    Shape(String),

    /// A file does not follow its declared format.
    #[error("format error: {0}")]
    Format(String),

    /// Paired inputs disagree (e.g. image/label counts).
    #[error("consistency error: {0}")]
    Consistency(String),

    /// The problem is degenerate (e.g. single-class training data).
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
