//! Fully quantized multiphoton absorption by two- and three-level systems.
//!
//! The crate builds the M-photon two-level Hamiltonian and the two-beam
//! three-level Hamiltonian on truncated Fock spaces, checks the operator
//! identities that lead to their intensity-dependent Rabi frequencies,
//! evaluates those closed forms and compares them with exact invariant-block
//! splittings and simulated oscillations.
//!
//! Units: ħ = 1, every frequency is angular.

pub mod algebra;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod models;
pub mod rabi;
pub mod verify;

pub use algebra::{commutator, expectation, Ket, Operator, C64};
pub use error::{Error, Result};
