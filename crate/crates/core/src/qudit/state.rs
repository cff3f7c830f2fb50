use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::check_dim;
use super::dynamics::{Evolve, Sign};
use super::operators::spin_operators;
use crate::error::{QuditError, Result};
use crate::linalg::{
    ensure_hermitian, hermitian_part, CMatrix, CVector, EigenDecomposition, ONE, ZERO,
};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

/// Common interface of pure and mixed qudit states.
pub trait QuditState {
    fn dim(&self) -> usize;

    fn to_density(&self) -> DensityMatrix;

    /// ⟨A⟩, with the imaginary residue checked against 1e-10.
    fn expectation(&self, a: &HermitianObservable) -> Result<f64>;

    /// ⟨(A − ⟨A⟩)²⟩, never negative by construction.
    fn variance(&self, a: &HermitianObservable) -> Result<f64>;

    fn as_pure(&self) -> Option<&PureState> {
        None
    }
}

/// Unit-norm amplitude vector of a qudit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorRepr", into = "VectorRepr")]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm_sq = amplitudes.norm_squared();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(QuditError::NotAState(format!(
                "squared norm {norm_sq} differs from 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(QuditError::NotAState("zero or non-finite vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub(crate) fn from_vector_unchecked(amplitudes: CVector) -> Self {
        debug_assert!((amplitudes.norm_squared() - 1.0).abs() < 1e-9);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn apply_matrix(&self, m: &CMatrix) -> Result<Self> {
        check_same_dim(self.dim(), m.nrows())?;
        Ok(Self::from_vector_unchecked(m * &self.amplitudes))
    }

    fn centered(&self, a: &HermitianObservable) -> Result<(f64, CVector)> {
        check_same_dim(self.dim(), a.dim())?;
        let a_psi = a.matrix() * &self.amplitudes;
        let mean = checked_real(self.amplitudes.dotc(&a_psi))?;
        let shifted = a_psi - self.amplitudes.scale(mean);
        Ok((mean, shifted))
    }
}

impl QuditState for PureState {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn to_density(&self) -> DensityMatrix {
        let a = &self.amplitudes;
        DensityMatrix {
            matrix: a * a.adjoint(),
        }
    }

    fn expectation(&self, a: &HermitianObservable) -> Result<f64> {
        self.centered(a).map(|(mean, _)| mean)
    }

    fn variance(&self, a: &HermitianObservable) -> Result<f64> {
        self.centered(a).map(|(_, shifted)| shifted.norm_squared())
    }

    fn as_pure(&self) -> Option<&PureState> {
        Some(self)
    }
}

/// Hermitian, unit-trace, positive semidefinite d×d operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_dim(matrix.nrows())?;
        ensure_hermitian(&matrix, HERMITIAN_TOL)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(QuditError::NotAState(format!("trace {trace} differs from 1")));
        }
        let min_eig = EigenDecomposition::of_hermitian(&matrix).eigenvalues[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(QuditError::NotAState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            matrix: CMatrix::identity(d, d).unscale(d as f64),
        })
    }

    /// Σ p_k |ψ_k⟩⟨ψ_k| for nonnegative weights summing to one.
    pub fn mixture(weights: &[f64], states: &[PureState]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(QuditError::InvalidArgument(
                "mixture needs one weight per state".into(),
            ));
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(QuditError::InvalidArgument("negative mixture weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(QuditError::InvalidArgument(format!(
                "mixture weights sum to {total}"
            )));
        }
        let d = states[0].dim();
        let mut matrix = CMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            check_same_dim(d, s.dim())?;
            matrix += s.to_density().matrix.scale(*w);
        }
        Ok(Self { matrix })
    }

    /// For matrices produced by channels or unitary conjugation whose validity
    /// follows from the construction.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        crate::linalg::trace_product(&self.matrix, &self.matrix).re
    }

    /// Eigendecomposition with eigenvalues in [−1e-10, 0) clamped to zero.
    pub fn spectrum(&self) -> EigenDecomposition {
        let mut eig = EigenDecomposition::of_hermitian(&self.matrix);
        for l in &mut eig.eigenvalues {
            if *l < 0.0 && *l >= -POSITIVITY_TOL {
                *l = 0.0;
            }
        }
        eig
    }
}

impl QuditState for DensityMatrix {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }

    fn expectation(&self, a: &HermitianObservable) -> Result<f64> {
        check_same_dim(self.dim(), a.dim())?;
        checked_real(crate::linalg::trace_product(&self.matrix, a.matrix()))
    }

    fn variance(&self, a: &HermitianObservable) -> Result<f64> {
        let mean = self.expectation(a)?;
        let d = self.dim();
        let shifted = a.matrix() - CMatrix::identity(d, d).scale(mean);
        let v = checked_real(crate::linalg::trace_product(
            &self.matrix,
            &(&shifted * &shifted),
        ))?;
        Ok(v.max(0.0))
    }
}

/// Hermitian d×d matrix used as a generator or readout observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct HermitianObservable {
    matrix: CMatrix,
}

impl HermitianObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(QuditError::InvalidDimension {
                dim: 0,
                expected: "nonempty matrix",
            });
        }
        ensure_hermitian(&matrix, HERMITIAN_TOL)?;
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            matrix: crate::linalg::real_diagonal(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> EigenDecomposition {
        EigenDecomposition::of_hermitian(&self.matrix)
    }

    /// U·A·U†
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        check_same_dim(self.dim(), u.nrows())?;
        Ok(Self::from_matrix_unchecked(u * &self.matrix * u.adjoint()))
    }

    pub fn squared(&self) -> Self {
        Self::from_matrix_unchecked(&self.matrix * &self.matrix)
    }

    /// Real linear combination Σ c_k A_k.
    pub fn linear_combination(terms: &[(f64, &HermitianObservable)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| QuditError::InvalidArgument("empty combination".into()))?;
        let d = first.dim();
        let mut m = CMatrix::zeros(d, d);
        for (c, a) in terms {
            check_same_dim(d, a.dim())?;
            m += a.matrix.scale(*c);
        }
        Ok(Self::from_matrix_unchecked(m))
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QuditError::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn checked_real(z: Complex64) -> Result<f64> {
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(QuditError::Invariant(format!(
            "expectation has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// |i⟩, the spin projection m = −J + i.
pub fn basis_state(d: usize, i: usize) -> Result<PureState> {
    check_dim(d)?;
    if i >= d {
        return Err(QuditError::IndexOutOfRange { index: i, dim: d });
    }
    let amps = CVector::from_fn(d, |k, _| if k == i { ONE } else { ZERO });
    Ok(PureState { amplitudes: amps })
}

/// (|0⟩ + |d−1⟩)/√2
pub fn ghz_like(d: usize) -> Result<PureState> {
    check_dim(d)?;
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let amps = CVector::from_fn(d, |k, _| if k == 0 || k == d - 1 { a } else { ZERO });
    Ok(PureState { amplitudes: amps })
}

/// exp(−i·azimuth·Jz)·exp(−i·polar·Jy)|0⟩
pub fn spin_coherent(d: usize, polar: f64, azimuth: f64) -> Result<PureState> {
    let spin = spin_operators(d)?;
    basis_state(d, 0)?
        .evolve(&spin.jy, polar, Sign::Minus)?
        .evolve(&spin.jz, azimuth, Sign::Minus)
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    dim: usize,
    data: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    /// Row-major entries.
    data: Vec<[f64; 2]>,
}

impl From<PureState> for VectorRepr {
    fn from(s: PureState) -> Self {
        Self {
            dim: s.dim(),
            data: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<VectorRepr> for PureState {
    type Error = QuditError;

    fn try_from(r: VectorRepr) -> Result<Self> {
        check_same_dim(r.dim, r.data.len())?;
        PureState::new(CVector::from_iterator(
            r.dim,
            r.data.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }
}

fn matrix_to_repr(m: &CMatrix) -> MatrixRepr {
    let n = m.nrows();
    let mut data = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let z = m[(r, c)];
            data.push([z.re, z.im]);
        }
    }
    MatrixRepr { dim: n, data }
}

fn matrix_from_repr(r: &MatrixRepr) -> Result<CMatrix> {
    check_same_dim(r.dim * r.dim, r.data.len())?;
    Ok(CMatrix::from_row_iterator(
        r.dim,
        r.dim,
        r.data.iter().map(|[re, im]| Complex64::new(*re, *im)),
    ))
}

impl From<DensityMatrix> for MatrixRepr {
    fn from(s: DensityMatrix) -> Self {
        matrix_to_repr(&s.matrix)
    }
}

impl TryFrom<MatrixRepr> for DensityMatrix {
    type Error = QuditError;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        DensityMatrix::new(matrix_from_repr(&r)?)
    }
}

impl From<HermitianObservable> for MatrixRepr {
    fn from(a: HermitianObservable) -> Self {
        matrix_to_repr(&a.matrix)
    }
}

impl TryFrom<MatrixRepr> for HermitianObservable {
    type Error = QuditError;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        HermitianObservable::new(matrix_from_repr(&r)?)
    }
}
