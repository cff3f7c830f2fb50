//! Single d-level system: states, operators, Bloch representation,
//! Givens pulse compilation and unitary evolution.
//!
//! Basis index `i` is the spin projection m = −J + i with J = (d − 1)/2.

mod bloch;
mod dynamics;
mod operators;
mod pulses;
mod state;

pub use bloch::{bloch_vector, density_from_bloch, gell_mann_coefficients, GellMannElement};
pub use dynamics::{evolve, expectation, variance, Evolve, Propagator, Sign};
pub use operators::{gell_mann_basis, phase_generator, spin_operators, SpinOperators};
pub use pulses::{
    apply_sequence, compile_preparation, givens_unitary, GivensPulse, PreparationTarget,
    PulseSequence,
};
pub use state::{
    basis_state, ghz_like, spin_coherent, DensityMatrix, HermitianObservable, PureState,
    QuditState,
};

/// Largest qudit dimension accepted by the state and operator types.
pub const MAX_DIM: usize = 64;

pub(crate) fn check_dim(d: usize) -> crate::error::Result<()> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(crate::error::QuditError::InvalidDimension {
            dim: d,
            expected: "2 <= d <= 64",
        });
    }
    Ok(())
}
