use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state specification: {0}")]
    InvalidSpec(String),

    #[error("qubit {qubit} out of range for {n}-qubit state")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{what} = {value} outside allowed range {range}")]
    InvalidParameter {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("state specification is not regular: {0}")]
    NonRegular(String),

    #[error("unknown color index {color} (spec has {count} colors)")]
    UnknownColor { color: usize, count: usize },

    #[error("purification map produced zero trace (postselection always fails)")]
    ZeroTrace,

    #[error("zero-probability branch: {0}")]
    ZeroProbability(String),

    #[error("bracket [{lo}, {hi}] does not straddle the transition ({detail})")]
    Bracket { lo: f64, hi: f64, detail: String },

    #[error("dimension cap exceeded: {what} needs {required} qubits, limit is {limit}")]
    DimensionCap {
        what: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("matrix is not right-stochastic: {0}")]
    NotStochastic(String),

    #[error("wire error: {0}")]
    Wire(String),

    #[error("cannot decompose into regular phase gates: {0}")]
    Decomposition(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
