use num_complex::Complex64;

use super::check_dim;
use super::state::{DensityMatrix, QuditState};
use crate::error::{QuditError, Result};
use crate::linalg::{CMatrix, ZERO};

/// One generalized Gell-Mann matrix, stored by its index structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GellMannElement {
    /// |j⟩⟨k| + |k⟩⟨j|
    Symmetric { j: usize, k: usize },
    /// −i|j⟩⟨k| + i|k⟩⟨j|
    Antisymmetric { j: usize, k: usize },
    /// √(2/(l(l+1))) (Σ_{m<l} |m⟩⟨m| − l|l⟩⟨l|), 1 ≤ l < d
    Diagonal { l: usize },
}

impl GellMannElement {
    /// Basis order used everywhere: all symmetric, all antisymmetric, all diagonal.
    pub fn all(d: usize) -> impl Iterator<Item = GellMannElement> {
        let pairs = move || (0..d).flat_map(move |j| (j + 1..d).map(move |k| (j, k)));
        pairs()
            .map(|(j, k)| GellMannElement::Symmetric { j, k })
            .chain(pairs().map(|(j, k)| GellMannElement::Antisymmetric { j, k }))
            .chain((1..d).map(|l| GellMannElement::Diagonal { l }))
    }

    pub fn to_matrix(self, d: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        match self {
            GellMannElement::Symmetric { j, k } => {
                m[(j, k)] = Complex64::new(1.0, 0.0);
                m[(k, j)] = Complex64::new(1.0, 0.0);
            }
            GellMannElement::Antisymmetric { j, k } => {
                m[(j, k)] = Complex64::new(0.0, -1.0);
                m[(k, j)] = Complex64::new(0.0, 1.0);
            }
            GellMannElement::Diagonal { l } => {
                let c = diag_norm(l);
                for i in 0..l {
                    m[(i, i)] = Complex64::new(c, 0.0);
                }
                m[(l, l)] = Complex64::new(-c * l as f64, 0.0);
            }
        }
        m
    }

    /// Tr(X·E) read off the nonzero pattern of E.
    pub fn trace_with(self, x: &CMatrix) -> Complex64 {
        match self {
            GellMannElement::Symmetric { j, k } => x[(k, j)] + x[(j, k)],
            GellMannElement::Antisymmetric { j, k } => {
                Complex64::new(0.0, -1.0) * x[(k, j)] + Complex64::new(0.0, 1.0) * x[(j, k)]
            }
            GellMannElement::Diagonal { l } => {
                let partial: Complex64 = (0..l).map(|i| x[(i, i)]).sum();
                (partial - x[(l, l)] * l as f64) * diag_norm(l)
            }
        }
    }

    fn accumulate_into(self, m: &mut CMatrix, weight: f64) {
        match self {
            GellMannElement::Symmetric { j, k } => {
                m[(j, k)] += weight;
                m[(k, j)] += weight;
            }
            GellMannElement::Antisymmetric { j, k } => {
                m[(j, k)] += Complex64::new(0.0, -weight);
                m[(k, j)] += Complex64::new(0.0, weight);
            }
            GellMannElement::Diagonal { l } => {
                let c = diag_norm(l) * weight;
                for i in 0..l {
                    m[(i, i)] += c;
                }
                m[(l, l)] -= c * l as f64;
            }
        }
    }
}

fn diag_norm(l: usize) -> f64 {
    (2.0 / (l * (l + 1)) as f64).sqrt()
}

/// Real coefficients Tr(X·E_a) of a Hermitian matrix in the Gell-Mann basis.
pub fn gell_mann_coefficients(x: &CMatrix) -> Vec<f64> {
    GellMannElement::all(x.nrows())
        .map(|e| e.trace_with(x).re)
        .collect()
}

/// ω_a = Tr(ρ E_a), so that ρ = I/d + ½ ω·E.
pub fn bloch_vector(rho: &DensityMatrix) -> Vec<f64> {
    gell_mann_coefficients(rho.matrix())
}

/// ρ = I/d + ½ ω·E, rejected when the result is not positive semidefinite.
pub fn density_from_bloch(d: usize, omega: &[f64]) -> Result<DensityMatrix> {
    check_dim(d)?;
    if omega.len() != d * d - 1 {
        return Err(QuditError::DimensionMismatch {
            expected: d * d - 1,
            found: omega.len(),
        });
    }
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(QuditError::InvalidArgument("non-finite Bloch component".into()));
    }
    let mut m = CMatrix::from_element(d, d, ZERO);
    for i in 0..d {
        m[(i, i)] = Complex64::new(1.0 / d as f64, 0.0);
    }
    for (e, w) in GellMannElement::all(d).zip(omega) {
        e.accumulate_into(&mut m, 0.5 * w);
    }
    let rho = DensityMatrix::new(m)?;
    debug_assert_eq!(rho.dim(), d);
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::qudit::{basis_state, gell_mann_basis};

    #[test]
    fn sparse_trace_matches_dense() {
        let d = 5;
        let x = CMatrix::from_fn(d, d, |r, c| Complex64::new((r * 7 + c) as f64, (r as f64) - (c as f64) * 0.3));
        for (e, dense) in GellMannElement::all(d).zip(gell_mann_basis(d).unwrap()) {
            let direct = crate::linalg::trace_product(&x, dense.matrix());
            assert!((e.trace_with(&x) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_has_zero_bloch_vector() {
        let rho = DensityMatrix::maximally_mixed(6).unwrap();
        assert!(bloch_vector(&rho).iter().all(|w| w.abs() < 1e-15));
        let back = density_from_bloch(6, &vec![0.0; 35]).unwrap();
        assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn qubit_north_pole() {
        let rho = basis_state(2, 0).unwrap().to_density();
        let w = bloch_vector(&rho);
        assert_eq!(w, vec![0.0, 0.0, 1.0]);
        let back = density_from_bloch(2, &[0.0, 0.0, 1.0]).unwrap();
        assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn outside_bloch_ball_is_rejected() {
        assert!(matches!(
            density_from_bloch(2, &[0.0, 0.0, 3.0]),
            Err(QuditError::NotAState(_))
        ));
        assert!(matches!(
            density_from_bloch(3, &[0.0; 3]),
            Err(QuditError::DimensionMismatch { .. })
        ));
    }
}
