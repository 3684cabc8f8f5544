//! Simulator and pulse-schedule compiler for deterministic preparation of
//! arbitrary symmetric N-qubit states on a dispersive qubit-bus architecture.
//!
//! The crate covers the full pipeline:
//!
//! * [`state`] — dense statevectors, Dicke states, symmetric superpositions;
//! * [`encoder`] — staircase decomposition and the conditional-rotation
//!   encoding circuit;
//! * [`dynamics`] — the effective dispersive flip-flop Hamiltonian, the full
//!   qubit+bus model, and unitary propagation;
//! * [`schedule`] — compilation of the selective-flop step sequence for an
//!   arbitrary target, execution against either backend, probability traces,
//!   and physical-unit conversion;
//! * [`fock`] — the alternative route: ancilla-assisted Fock-superposition
//!   synthesis followed by a chirped adiabatic collective-sideband map;
//! * [`classify`] — entanglement classification of symmetric states by root
//!   multiplicities of the associated polynomial.
//!
//! All rates are expressed in units of the collective sideband rate `g1`,
//! all times in `1/g1`, with ħ = 1. A single helper
//! ([`schedule::physical_units`]) converts to SI given a physical `g1`.
//!
//! Basis ordering is fixed globally: qubit 1 is the most significant bit,
//! `|g⟩ = 0` sorts before `|e⟩ = 1`, and the boson index (when present) is
//! least significant.

pub mod classify;
pub mod dynamics;
pub mod encoder;
pub mod fock;
pub mod linalg;
pub mod par;
pub mod schedule;
pub mod state;

use thiserror::Error;

/// Hard cap on dense qubit registers (2^14 amplitudes ≈ 262 kB per state).
pub const MAX_QUBITS: usize = 14;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
