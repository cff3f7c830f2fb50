//! Permutationally symmetric N-qubit states and collective spin operators.
//!
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of
//! the computational-basis index. σz|0⟩ = +|0⟩, so a string with k ones has
//! collective Jz = N/2 − k. Qudit level |i⟩ (m = i − J) is therefore embedded
//! as the Dicke state with N − i excitations.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::direction::GeneratorDirection;
use crate::error::{QuditError, Result};
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::qfi::{qfi_pure, spectral_quadratic_form, top_direction};
use crate::qudit::{spin_operators, DensityMatrix, PureState, QuditState};

pub const MAX_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;
/// Largest register handled by the dense mixed-state routines.
const MAX_DENSE_QUBITS: usize = 6;

fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(QuditError::InvalidDimension {
            dim: n,
            expected: "1 <= N <= 12 qubits",
        })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn bit_mask(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// Unit vector on 2^N amplitudes, invariant under qubit permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl SymmetricState {
    pub fn new(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(QuditError::DimensionMismatch {
                expected: 1 << n_qubits,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuditError::NotAState(format!("norm {norm} differs from 1")));
        }
        let asym = swap_asymmetry(n_qubits, &amplitudes);
        if asym > SYMMETRY_TOL {
            return Err(QuditError::NotAState(format!(
                "amplitudes change by {asym:e} under a qubit swap"
            )));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn inner(&self, other: &SymmetricState) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(QuditError::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Amplitudes of the Dicke components, ordered as the qudit levels.
    pub fn to_qudit(&self) -> PureState {
        let n = self.n_qubits;
        let mut out = CVector::zeros(n + 1);
        for k in 0..=n {
            // every string with k ones carries the same amplitude
            let idx = (1usize << k) - 1;
            out[n - k] = self.amplitudes[idx] * binomial(n, k).sqrt();
        }
        PureState::from_vector_unchecked(out)
    }
}

/// Largest amplitude change under any adjacent-qubit swap.
pub fn swap_asymmetry(n: usize, amplitudes: &CVector) -> f64 {
    let mut worst = 0.0f64;
    for q in 0..n.saturating_sub(1) {
        let (a, b) = (bit_mask(n, q), bit_mask(n, q + 1));
        for idx in 0..amplitudes.len() {
            if (idx & a != 0) != (idx & b != 0) {
                let swapped = idx ^ a ^ b;
                worst = worst.max((amplitudes[idx] - amplitudes[swapped]).norm());
            }
        }
    }
    worst
}

/// Uniform superposition of the C(N,k) strings with k ones.
pub fn dicke_multiqubit(n: usize, k: usize) -> Result<SymmetricState> {
    check_qubits(n)?;
    if k > n {
        return Err(QuditError::IndexOutOfRange { index: k, dim: n + 1 });
    }
    let amp = Complex64::new(binomial(n, k).sqrt().recip(), 0.0);
    let amplitudes = CVector::from_fn(1 << n, |idx, _| {
        if idx.count_ones() as usize == k {
            amp
        } else {
            ZERO
        }
    });
    Ok(SymmetricState { n_qubits: n, amplitudes })
}

/// (|0…0⟩ + |1…1⟩)/√2.
pub fn ghz_multiqubit(n: usize) -> Result<SymmetricState> {
    check_qubits(n)?;
    let mut amplitudes = CVector::zeros(1 << n);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amplitudes[0] = amp;
    amplitudes[(1 << n) - 1] = amp;
    Ok(SymmetricState { n_qubits: n, amplitudes })
}

/// Isometry from a d-level qudit onto the symmetric subspace of N = d − 1 qubits.
pub fn embed_qudit(psi: &PureState) -> Result<SymmetricState> {
    let amplitudes = embed_vector(psi.amplitudes())?;
    Ok(SymmetricState {
        n_qubits: psi.dim() - 1,
        amplitudes,
    })
}

/// The same linear map on an arbitrary (not necessarily normalized) vector.
pub fn embed_vector(v: &CVector) -> Result<CVector> {
    let d = v.len();
    if !(2..=MAX_QUBITS + 1).contains(&d) {
        return Err(QuditError::InvalidDimension {
            dim: d,
            expected: "2 <= d <= 13 for embedding",
        });
    }
    let n = d - 1;
    let weights: Vec<f64> = (0..=n).map(|k| binomial(n, k).sqrt().recip()).collect();
    Ok(CVector::from_fn(1 << n, |idx, _| {
        let k = idx.count_ones() as usize;
        v[n - k] * weights[k]
    }))
}

/// n·J = Σ_q (n·σ)^(q)/2, applied without forming the 2^N matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveOperator {
    n_qubits: usize,
    direction: GeneratorDirection,
}

pub fn collective_op(n: usize, direction: GeneratorDirection) -> Result<CollectiveOperator> {
    check_qubits(n)?;
    Ok(CollectiveOperator { n_qubits: n, direction })
}

impl CollectiveOperator {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn direction(&self) -> GeneratorDirection {
        self.direction
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        let n = self.n_qubits;
        if v.len() != 1 << n {
            return Err(QuditError::DimensionMismatch {
                expected: 1 << n,
                found: v.len(),
            });
        }
        let [nx, ny, nz] = self.direction.components();
        // amplitude picked up by a flip from bit value 0 / 1
        let flip0 = Complex64::new(nx, ny) * 0.5;
        let flip1 = Complex64::new(nx, -ny) * 0.5;
        let mut out = CVector::zeros(v.len());
        for q in 0..n {
            let mask = bit_mask(n, q);
            for idx in 0..v.len() {
                let a = v[idx];
                if a == ZERO {
                    continue;
                }
                let (flip, z) = if idx & mask == 0 {
                    (flip0, 0.5 * nz)
                } else {
                    (flip1, -0.5 * nz)
                };
                out[idx ^ mask] += flip * a;
                out[idx] += a * z;
            }
        }
        Ok(out)
    }

    /// Dense 2^N matrix; only for registers small enough to store.
    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(QuditError::InvalidDimension {
                dim: self.n_qubits,
                expected: "N <= 6 for dense collective operators",
            });
        }
        let dim = 1 << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut e = CVector::zeros(dim);
            e[col] = Complex64::new(1.0, 0.0);
            m.set_column(col, &self.apply(&e)?);
        }
        Ok(m)
    }
}

/// 4·Var(n·J) on the symmetric state.
pub fn qfi_pure_symmetric(psi: &SymmetricState, direction: GeneratorDirection) -> Result<f64> {
    let v = collective_op(psi.n_qubits, direction)?.apply(&psi.amplitudes)?;
    let mean = psi.amplitudes.dotc(&v).re;
    Ok((4.0 * (v.norm_squared() - mean * mean)).max(0.0))
}

fn axes() -> [GeneratorDirection; 3] {
    [GeneratorDirection::X, GeneratorDirection::Y, GeneratorDirection::Z]
}

/// Collective QFI matrix 4·Cov(J) of a pure register.
pub fn collective_qfi_matrix_symmetric(psi: &SymmetricState) -> Result<Matrix3<f64>> {
    let n = psi.n_qubits;
    let mut moved = Vec::with_capacity(3);
    for axis in axes() {
        moved.push(collective_op(n, axis)?.apply(&psi.amplitudes)?);
    }
    let means: Vec<f64> = moved.iter().map(|v| psi.amplitudes.dotc(v).re).collect();
    Ok(Matrix3::from_fn(|a, b| {
        4.0 * (moved[a].dotc(&moved[b]).re - means[a] * means[b])
    }))
}

/// Max over collective directions of F_Q/N for a pure symmetric register.
pub fn n_eff(psi: &SymmetricState) -> Result<f64> {
    let (f, _) = top_direction(&collective_qfi_matrix_symmetric(psi)?)?;
    Ok(f / psi.n_qubits as f64)
}

/// Mixed-state N_eff through the spectral QFI; ρ must live on 2^N levels, N ≤ 6.
pub fn n_eff_mixed(rho: &DensityMatrix, n: usize) -> Result<f64> {
    check_qubits(n)?;
    if rho.dim() != 1 << n {
        return Err(QuditError::DimensionMismatch {
            expected: 1 << n,
            found: rho.dim(),
        });
    }
    let mut ops = Vec::with_capacity(3);
    for axis in axes() {
        ops.push(collective_op(n, axis)?.to_dense()?);
    }
    let m = spectral_quadratic_form(&rho.spectrum(), [&ops[0], &ops[1], &ops[2]]);
    let (f, _) = top_direction(&m)?;
    Ok(f / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCase {
    pub state_label: String,
    pub direction: GeneratorDirection,
    pub qudit_qfi: f64,
    pub multiqubit_qfi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub n_qubits: usize,
    pub cases: Vec<EquivalenceCase>,
    pub max_residual: f64,
    pub pass: bool,
}

impl EquivalenceReport {
    /// Combines two reports on the same register; the tolerance must already
    /// be reflected in each `pass`.
    pub fn merge(mut self, other: EquivalenceReport) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(QuditError::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.cases.extend(other.cases);
        self.max_residual = self.max_residual.max(other.max_residual);
        self.pass &= other.pass;
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Compares qfi_pure(ψ, n·J) on the qudit with the collective QFI of the
/// embedded register for each direction.
pub fn qfi_equivalence_check(
    psi: &PureState,
    label: &str,
    directions: &[GeneratorDirection],
    tol: f64,
) -> Result<EquivalenceReport> {
    let embedded = embed_qudit(psi)?;
    let spin = spin_operators(psi.dim())?;
    let mut cases = Vec::with_capacity(directions.len());
    for &direction in directions {
        let qudit_qfi = qfi_pure(psi, &spin.along(&direction))?;
        let multiqubit_qfi = qfi_pure_symmetric(&embedded, direction)?;
        cases.push(EquivalenceCase {
            state_label: label.to_string(),
            direction,
            qudit_qfi,
            multiqubit_qfi,
            residual: (qudit_qfi - multiqubit_qfi).abs(),
        });
    }
    let max_residual = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        n_qubits: embedded.n_qubits,
        cases,
        max_residual,
        pass: max_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs_diff, I};
    use crate::qudit::{basis_state, ghz_like};
    use crate::random::random_pure_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dicke_examples() {
        let s = dicke_multiqubit(2, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = CVector::from_vec(vec![c(0.0), c(h), c(h), c(0.0)]);
        assert!((s.amplitudes() - expected).norm() < 1e-15);
        let s = dicke_multiqubit(3, 0).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0));
        let s = dicke_multiqubit(4, 2).unwrap();
        let nonzero: Vec<_> = s.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 6);
        assert!(nonzero.iter().all(|a| (a.re - 6f64.sqrt().recip()).abs() < 1e-15));
        assert!(dicke_multiqubit(3, 4).is_err());
        assert!(dicke_multiqubit(13, 1).is_err());
        assert!(dicke_multiqubit(0, 0).is_err());
    }

    #[test]
    fn symmetric_state_validation() {
        let mut v = CVector::zeros(4);
        v[1] = c(1.0);
        assert!(SymmetricState::new(2, v).is_err());
        assert!(SymmetricState::new(2, CVector::zeros(3)).is_err());
        let ghz = ghz_multiqubit(3).unwrap();
        assert!(SymmetricState::new(3, ghz.amplitudes().clone()).is_ok());
    }

    #[test]
    fn collective_small_cases() {
        let z = collective_op(2, GeneratorDirection::Z).unwrap().to_dense().unwrap();
        let expected = crate::linalg::real_diagonal(&[1.0, 0.0, 0.0, -1.0]);
        assert!(max_abs_diff(&z, &expected) < 1e-15);
        let y = collective_op(1, GeneratorDirection::Y).unwrap().to_dense().unwrap();
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 0.5));
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -0.5));
    }

    #[test]
    fn collective_algebra_and_spectrum() {
        for n in 1..=5 {
            let [x, y, z] = axes().map(|a| collective_op(n, a).unwrap().to_dense().unwrap());
            assert!(max_abs_diff(&commutator(&x, &y), &(z.clone() * I)) < 1e-10);
            let mut eig = crate::linalg::EigenDecomposition::of_hermitian(&x).eigenvalues;
            eig.sort_by(f64::total_cmp);
            let mut expected = Vec::new();
            for k in 0..=n {
                let m = n as f64 / 2.0 - k as f64;
                expected.extend(std::iter::repeat_n(m, binomial(n, k) as usize));
            }
            expected.sort_by(f64::total_cmp);
            for (a, b) in eig.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn embedding_maps_ghz_and_basis() {
        let e = embed_qudit(&ghz_like(5).unwrap()).unwrap();
        assert!((e.amplitudes() - ghz_multiqubit(4).unwrap().amplitudes()).norm() < 1e-15);
        let e = embed_qudit(&basis_state(5, 1).unwrap()).unwrap();
        assert!((e.amplitudes() - dicke_multiqubit(4, 3).unwrap().amplitudes()).norm() < 1e-15);
        assert!(embed_qudit(&basis_state(14, 0).unwrap()).is_err());
    }

    #[test]
    fn embedding_is_isometric_and_intertwines() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=7 {
            let spin = spin_operators(d).unwrap();
            let states: Vec<_> = (0..4).map(|_| random_pure_state(d, &mut rng).unwrap()).collect();
            let embedded: Vec<_> = states.iter().map(|s| embed_qudit(s).unwrap()).collect();
            for (a, ea) in states.iter().zip(&embedded) {
                for (b, eb) in states.iter().zip(&embedded) {
                    assert!((a.inner(b).unwrap() - ea.inner(eb).unwrap()).norm() < 1e-10);
                }
                assert!((ea.to_qudit().amplitudes() - a.amplitudes()).norm() < 1e-12);
                let n = crate::random::random_direction(&mut rng);
                let lhs = embed_vector(&(spin.along(&n).matrix() * a.amplitudes())).unwrap();
                let rhs = collective_op(d - 1, n).unwrap().apply(ea.amplitudes()).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let r = qfi_equivalence_check(&ghz_like(5).unwrap(), "ghz", &[GeneratorDirection::Z], 1e-8).unwrap();
        assert!(r.pass);
        assert!((r.cases[0].qudit_qfi - 16.0).abs() < 1e-10);
        assert!((r.cases[0].multiqubit_qfi - 16.0).abs() < 1e-10);
        let r = qfi_equivalence_check(&basis_state(5, 2).unwrap(), "dicke", &[GeneratorDirection::X], 1e-8).unwrap();
        assert!((r.cases[0].multiqubit_qfi - 12.0).abs() < 1e-10);
        let merged = r.clone().merge(r).unwrap();
        assert_eq!(merged.cases.len(), 2);
        let json: serde_json::Value = serde_json::from_str(&merged.to_json()).unwrap();
        for key in ["n_qubits", "cases", "max_residual", "pass"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn n_eff_examples() {
        assert!((n_eff(&dicke_multiqubit(5, 0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((n_eff(&ghz_multiqubit(6).unwrap()).unwrap() - 6.0).abs() < 1e-12);
        let dicke = basis_state(4, 1).unwrap();
        let (f_max, _) = crate::qfi::qfi_max_collective(&dicke).unwrap();
        let n = n_eff(&dicke_multiqubit(3, 1).unwrap()).unwrap();
        assert!((n - f_max / 3.0).abs() < 1e-10);
        let rho = DensityMatrix::from_matrix_unchecked(
            ghz_multiqubit(3).unwrap().amplitudes() * ghz_multiqubit(3).unwrap().amplitudes().adjoint(),
        );
        assert!((n_eff_mixed(&rho, 3).unwrap() - 3.0).abs() < 1e-10);
        assert!(n_eff_mixed(&rho, 2).is_err());
    }
}
