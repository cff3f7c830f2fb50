use num_complex::Complex64;

use super::bloch::GellMannElement;
use super::check_dim;
use super::state::HermitianObservable;
use crate::direction::GeneratorDirection;
use crate::error::Result;
use crate::linalg::CMatrix;

/// Spin-J representation with J = (d − 1)/2.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub jx: HermitianObservable,
    pub jy: HermitianObservable,
    pub jz: HermitianObservable,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.jz.dim()
    }

    pub fn spin(&self) -> f64 {
        (self.dim() - 1) as f64 / 2.0
    }

    /// n·J
    pub fn along(&self, n: &GeneratorDirection) -> HermitianObservable {
        let [x, y, z] = n.components();
        let m = self.jx.matrix().scale(x) + self.jy.matrix().scale(y) + self.jz.matrix().scale(z);
        HermitianObservable::from_matrix_unchecked(m)
    }

    pub fn as_array(&self) -> [&HermitianObservable; 3] {
        [&self.jx, &self.jy, &self.jz]
    }
}

/// Jx, Jy, Jz in the basis |i⟩ = |J, −J + i⟩.
pub fn spin_operators(d: usize) -> Result<SpinOperators> {
    check_dim(d)?;
    let j = (d - 1) as f64 / 2.0;
    // J₊|m⟩ = √(J(J+1) − m(m+1)) |m+1⟩
    let mut raise = CMatrix::zeros(d, d);
    for i in 0..d - 1 {
        let m = -j + i as f64;
        raise[(i + 1, i)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower).scale(0.5);
    let jy = (&raise - &lower) * Complex64::new(0.0, -0.5);
    let jz = crate::linalg::real_diagonal(
        &(0..d).map(|i| -j + i as f64).collect::<Vec<_>>(),
    );
    Ok(SpinOperators {
        jx: HermitianObservable::from_matrix_unchecked(jx),
        jy: HermitianObservable::from_matrix_unchecked(jy),
        jz: HermitianObservable::from_matrix_unchecked(jz),
    })
}

/// P = diag(0, 1, …, d−1) = Jz + (d−1)/2·I
pub fn phase_generator(d: usize) -> Result<HermitianObservable> {
    check_dim(d)?;
    Ok(HermitianObservable::diagonal(
        &(0..d).map(|i| i as f64).collect::<Vec<_>>(),
    ))
}

/// Generalized Gell-Mann matrices: symmetric, then antisymmetric (both over
/// level pairs j < k in lexicographic order), then diagonal. For d = 2 this is
/// (σx, σy, σz).
pub fn gell_mann_basis(d: usize) -> Result<Vec<HermitianObservable>> {
    check_dim(d)?;
    Ok(GellMannElement::all(d)
        .map(|e| HermitianObservable::from_matrix_unchecked(e.to_matrix(d)))
        .collect())
}
