use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} is outside the register [1, {n_qubits}]")]
    InvalidQubit { qubit: usize, n_qubits: usize },

    #[error("non-finite angle in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary (max |U†U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("parameter vector has length {found}, ansatz expects {expected}")]
    ParamLength { expected: usize, found: usize },

    #[error("no equatorial decomposition found: {0}")]
    NoSolution(String),

    #[error(
        "permutation search over {0} distinct factors refused (limit 8, pass force to override)"
    )]
    TooManyFactors(usize),

    #[error("matrix is not a tensor product of single-qubit unitaries")]
    NotLocal,

    #[error("error model does not cover pulse: {0}")]
    UncoveredPulse(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
