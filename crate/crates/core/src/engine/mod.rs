//! Statevector simulation of parameterized circuits and observable measurement.

mod ansatz;
mod circuit;
mod state;

pub use ansatz::{build_ansatz, AnsatzKind, AnsatzSpec};
pub use circuit::{Angle, Circuit, Gate, ParameterVector};
pub use state::{
    hamiltonian_energy, observable_expectation, simulate, term_energies, term_seed, Shots,
    Statevector,
};

use thiserror::Error;

use crate::pauli::PauliError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("qubit {qubit} out of range for a {qubit_count}-qubit circuit")]
    QubitOutOfRange { qubit: usize, qubit_count: usize },

    #[error("two-qubit gate targets qubit {0} twice")]
    DuplicateTargets(usize),

    #[error("parameter slot {0} is never used; slots must be contiguous")]
    NonContiguousSlots(usize),

    #[error("expected {expected} parameters, got {found}")]
    ParameterLength { expected: usize, found: usize },

    #[error("observable covers {found} qubits but the state has {expected}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("{qubits} qubits exceeds the statevector capacity of {max}")]
    Capacity { qubits: usize, max: usize },

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("invalid ansatz or circuit: {0}")]
    InvalidSpec(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error(transparent)]
    Pauli(#[from] PauliError),
}
