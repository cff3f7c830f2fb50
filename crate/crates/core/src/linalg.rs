//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Hermitian spectra come from
//! `SymmetricEigen`, sorted ascending so that downstream code can rely on a
//! fixed eigenvalue order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QuditError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest entry of |M − M†|.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn ensure_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(QuditError::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let residual = hermiticity_residual(m);
    if residual > tol {
        return Err(QuditError::NotHermitian { residual });
    }
    Ok(())
}

/// (M + M†)/2
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Tr(A·B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for r in 0..n {
        for c in 0..n {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(values[r], 0.0)
        } else {
            ZERO
        }
    })
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues ascend; column `k` of `eigenvectors` belongs to `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn of_hermitian(m: &CMatrix) -> Self {
        let eig = nalgebra::SymmetricEigen::new(hermitian_part(m));
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let n = m.nrows();
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// V·f(Λ)·V† for a complex-valued spectral function.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for r in 0..self.dim() {
                scaled[(r, k)] *= w;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|l| Complex64::new(l, 0.0))
    }

    /// exp(i·t·M) for the decomposed matrix M.
    pub fn exp_i(&self, t: f64) -> CMatrix {
        self.map_spectrum(|l| Complex64::from_polar(1.0, t * l))
    }

    /// Expresses an operator in the eigenbasis: V†·A·V.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_reconstructs_and_sorts() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.5, -0.25),
                ZERO,
                Complex64::new(0.5, 0.25),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.3),
                ZERO,
                Complex64::new(0.0, -0.3),
                Complex64::new(0.7, 0.0),
            ],
        );
        let eig = EigenDecomposition::of_hermitian(&m);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(max_abs_diff(&eig.reconstruct(), &m) < 1e-12);
        let gram = eig.eigenvectors.adjoint() * &eig.eigenvectors;
        assert!(max_abs_diff(&gram, &CMatrix::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn exp_i_of_zero_is_identity() {
        let m = real_diagonal(&[0.0, 1.0, 2.0]);
        let eig = EigenDecomposition::of_hermitian(&m);
        assert!(max_abs_diff(&eig.exp_i(0.0), &CMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(
            ensure_hermitian(&m, 1e-12),
            Err(QuditError::NotHermitian { .. })
        ));
    }
}
