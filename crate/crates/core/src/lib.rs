//! Entanglement-free quantum parameter estimation on a single qudit.
//!
//! The crate builds Dicke-like and GHZ-like probe states of a d-level system,
//! evaluates quantum Fisher information with several independent estimators,
//! simulates the full estimation protocols, models collective dephasing and
//! checks the correspondence with permutation-symmetric N-qubit states.

pub mod cli;
pub mod decoherence;
pub mod direction;
pub mod error;
pub mod linalg;
pub mod multiqubit;
pub mod output;
pub mod par;
pub mod protocols;
pub mod qfi;
pub mod qudit;
pub mod random;

pub use direction::GeneratorDirection;
pub use error::{QuditError, Result};
