use serde::{Deserialize, Serialize};

use super::state::{check_same_dim, DensityMatrix, HermitianObservable, PureState, QuditState};
use crate::error::Result;
use crate::linalg::{CMatrix, EigenDecomposition};

/// Sign s in exp(s·iθG).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// exp(s·iθG) for a fixed generator, diagonalized once.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: EigenDecomposition,
}

impl Propagator {
    pub fn new(generator: &HermitianObservable) -> Self {
        Self {
            eigen: generator.eigen(),
        }
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    pub fn unitary(&self, theta: f64, sign: Sign) -> CMatrix {
        self.eigen.exp_i(sign.value() * theta)
    }
}

pub trait Evolve: Sized {
    fn apply_unitary(&self, u: &CMatrix) -> Result<Self>;

    /// exp(s·iθG) applied to the state (conjugation for density matrices).
    fn evolve(&self, generator: &HermitianObservable, theta: f64, sign: Sign) -> Result<Self> {
        self.apply_unitary(&Propagator::new(generator).unitary(theta, sign))
    }
}

impl Evolve for PureState {
    fn apply_unitary(&self, u: &CMatrix) -> Result<Self> {
        self.apply_matrix(u)
    }
}

impl Evolve for DensityMatrix {
    fn apply_unitary(&self, u: &CMatrix) -> Result<Self> {
        check_same_dim(self.dim(), u.nrows())?;
        Ok(DensityMatrix::from_matrix_unchecked(
            u * self.matrix() * u.adjoint(),
        ))
    }
}

pub fn evolve<S: Evolve>(
    state: &S,
    generator: &HermitianObservable,
    theta: f64,
    sign: Sign,
) -> Result<S> {
    state.evolve(generator, theta, sign)
}

pub fn expectation<S: QuditState>(state: &S, a: &HermitianObservable) -> Result<f64> {
    state.expectation(a)
}

pub fn variance<S: QuditState>(state: &S, a: &HermitianObservable) -> Result<f64> {
    state.variance(a)
}
