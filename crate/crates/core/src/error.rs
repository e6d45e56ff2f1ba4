use thiserror::Error;

/// Errors raised by model construction, circuit assembly and estimation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} needs {required} qubits, exceeding the limit of {limit}")]
    Capacity {
        what: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("could not allocate a {qubits}-qubit statevector")]
    OutOfMemory { qubits: usize },

    #[error("qubit index {index} out of range for width {width}")]
    QubitOutOfRange { index: usize, width: usize },

    #[error("qubit {0} used more than once by a gate")]
    DuplicateQubit(usize),

    #[error("basis index {index} out of range for {width} qubits")]
    BasisOutOfRange { index: usize, width: usize },

    #[error("the all-identity Pauli string has no gate form; fold it into the scalar prefactor")]
    IdentityString,

    #[error("no anti-Hermitian terms: the evolution is unitary and needs no block encoding")]
    NoAntiHermitianTerms,

    #[error("block ancilla {0} is acted on again after it was projected")]
    AncillaReused(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("quadrature did not converge: estimated error {achieved:e} > tolerance {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("estimate mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
