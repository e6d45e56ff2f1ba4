//! Traces of non-unitary evolution operators on a simulated gate-based
//! quantum computer, and the integrated correlation functions of a 1D
//! contact-interaction model built from them.

pub mod block_encoding;
pub mod circuit;
pub mod error;
pub mod estimator;
pub mod icf;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod qasm;
pub mod statevector;

pub use error::{Error, Result};
