use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::estimators::spectral_weight;
use crate::direction::GeneratorDirection;
use crate::error::{QuditError, Result};
use crate::linalg::{CMatrix, EigenDecomposition};
use crate::qudit::{spin_operators, PureState, QuditState};

const PURE_RANGE_TOL: f64 = 1e-8;

/// Summary of a state's metrological resources under collective generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfiReport {
    pub f_q: f64,
    pub direction: GeneratorDirection,
    pub d_eff: f64,
    pub nonclassicality: f64,
    pub metrological_power: f64,
    /// Cramér-Rao bound in rad² for the configured number of measurements.
    #[serde(with = "crate::output::float_token")]
    pub crb: f64,
}

/// Real symmetric M with F(n·J) = nᵀ M n for the three operators `ops`,
/// evaluated through the spectral QFI formula.
pub fn spectral_quadratic_form(eig: &EigenDecomposition, ops: [&CMatrix; 3]) -> Matrix3<f64> {
    let rotated = ops.map(|op| eig.to_eigenbasis(op));
    let lambda = &eig.eigenvalues;
    let mut m = Matrix3::zeros();
    for i in 0..lambda.len() {
        for j in 0..lambda.len() {
            if i == j {
                continue;
            }
            let w = spectral_weight(lambda[i], lambda[j]);
            if w == 0.0 {
                continue;
            }
            for a in 0..3 {
                for b in a..3 {
                    m[(a, b)] += w * (rotated[a][(i, j)] * rotated[b][(i, j)].conj()).re;
                }
            }
        }
    }
    symmetrize(m.scale(2.0))
}

/// 4·C with C_ab = ½⟨{J_a, J_b}⟩ − ⟨J_a⟩⟨J_b⟩, the pure-state quadratic form.
fn covariance_form(psi: &PureState) -> Result<Matrix3<f64>> {
    let spin = spin_operators(psi.dim())?;
    let images = spin.as_array().map(|op| op.matrix() * psi.amplitudes());
    let means: Vec<f64> = images
        .iter()
        .map(|v| psi.amplitudes().dotc(v).re)
        .collect();
    let mut c = Matrix3::zeros();
    for a in 0..3 {
        for b in a..3 {
            c[(a, b)] = images[a].dotc(&images[b]).re - means[a] * means[b];
        }
    }
    Ok(symmetrize(c.scale(4.0)))
}

fn symmetrize(mut m: Matrix3<f64>) -> Matrix3<f64> {
    for a in 0..3 {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    m
}

/// Quadratic form F(n) = nᵀ M n over collective directions. Pure states use
/// the covariance of J, mixed states the spectral formula.
pub fn collective_qfi_matrix<S: QuditState>(state: &S) -> Result<Matrix3<f64>> {
    match state.as_pure() {
        Some(psi) => covariance_form(psi),
        None => {
            let rho = state.to_density();
            let spin = spin_operators(rho.dim())?;
            Ok(spectral_quadratic_form(
                &rho.spectrum(),
                spin.as_array().map(|op| op.matrix()),
            ))
        }
    }
}

/// Largest eigenvalue of a 3×3 symmetric form and its unit eigenvector.
pub fn top_direction(m: &Matrix3<f64>) -> Result<(f64, GeneratorDirection)> {
    let eig = SymmetricEigen::new(*m);
    let k = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(k);
    let dir = GeneratorDirection::normalized([v[0], v[1], v[2]])?.canonical();
    Ok((eig.eigenvalues[k].max(0.0), dir))
}

/// max over unit n of F_Q(ρ, n·J), with the maximizing direction.
pub fn qfi_max_collective<S: QuditState>(state: &S) -> Result<(f64, GeneratorDirection)> {
    top_direction(&collective_qfi_matrix(state)?)
}

/// F_max/(d − 1); the SQL value is 1.
pub fn d_eff<S: QuditState>(state: &S) -> Result<f64> {
    let (f, _) = qfi_max_collective(state)?;
    d_eff_from_max(state, f)
}

fn d_eff_from_max<S: QuditState>(state: &S, f_max: f64) -> Result<f64> {
    let d = state.dim();
    let upper = (d - 1) as f64;
    let value = f_max / upper;
    if state.as_pure().is_none() {
        return Ok(value);
    }
    if !(1.0 - PURE_RANGE_TOL..=upper + PURE_RANGE_TOL).contains(&value) {
        return Err(QuditError::Invariant(format!(
            "pure-state d_eff {value} outside [1, {upper}]"
        )));
    }
    // pure states lie in [1, d − 1]; drop roundoff past the ends
    Ok(value.clamp(1.0, upper))
}

/// F_max − (d − 1): zero on spin-coherent states, negative for strongly
/// mixed states.
pub fn nonclassicality<S: QuditState>(state: &S) -> Result<f64> {
    let (f, _) = qfi_max_collective(state)?;
    Ok(f - (state.dim() - 1) as f64)
}

/// max(d_eff − 1, 0)
pub fn metrological_power<S: QuditState>(state: &S) -> Result<f64> {
    Ok((d_eff(state)? - 1.0).max(0.0))
}

/// max(F/(d − 1) − 1, 0) for a QFI evaluated under a fixed generator.
pub fn metrological_power_from_qfi(f_q: f64, d: usize) -> f64 {
    (f_q / (d - 1) as f64 - 1.0).max(0.0)
}

/// 1/(m·F), infinite when F = 0.
pub fn cramer_rao(f_q: f64, measurements: u32) -> Result<f64> {
    if measurements < 1 {
        return Err(QuditError::InvalidArgument(
            "number of measurements must be at least 1".into(),
        ));
    }
    if f_q.is_nan() || f_q < 0.0 {
        return Err(QuditError::InvalidArgument(format!("QFI must be >= 0, got {f_q}")));
    }
    if f_q == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (measurements as f64 * f_q))
}

pub fn qfi_report<S: QuditState>(state: &S, measurements: u32) -> Result<QfiReport> {
    let (f_q, direction) = qfi_max_collective(state)?;
    let d_eff = d_eff_from_max(state, f_q)?;
    Ok(QfiReport {
        f_q,
        direction,
        d_eff,
        nonclassicality: f_q - (state.dim() - 1) as f64,
        metrological_power: (d_eff - 1.0).max(0.0),
        crb: cramer_rao(f_q, measurements)?,
    })
}
