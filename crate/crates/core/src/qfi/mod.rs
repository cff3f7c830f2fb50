//! Quantum Fisher information and the resource measures built on it.
//!
//! Four estimators are provided and cross-checked against each other:
//! the SLD trace Tr(ρL²), the spectral sum over eigenpairs of ρ, four times the
//! variance for pure states, and the squared Bloch-vector velocity.

mod estimators;
mod measures;

pub use estimators::{
    qfi_pure, qfi_pure_bloch, qfi_sld, qfi_spectral, sld, sld_residual, unitary_derivative,
    DEGENERACY_TOL,
};
pub use measures::{
    collective_qfi_matrix, cramer_rao, d_eff, metrological_power, metrological_power_from_qfi,
    nonclassicality, qfi_max_collective, qfi_report, spectral_quadratic_form, top_direction,
    QfiReport,
};
pub use crate::linalg::EigenDecomposition;
pub use crate::direction::GeneratorDirection;
