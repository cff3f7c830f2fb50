//! Two-level (Givens) rotations and a compiler that prepares probe states
//! from |0⟩ with exact unit phases.
//!
//! A pulse on levels (j, k) is U = exp[−i(θ/2)(cos φ X_jk + sin φ Y_jk)],
//! whose 2×2 block is
//!
//! ```text
//! [ cos θ/2              −i sin θ/2 · e^{−iφ} ]
//! [ −i sin θ/2 · e^{iφ}   cos θ/2             ]
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::check_dim;
use super::state::{check_same_dim, PureState, QuditState};
use crate::error::{QuditError, Result};
use crate::linalg::{CMatrix, CVector};

/// Axis phase for which |j⟩ → |k⟩ picks up no phase (U_kj = sin θ/2).
const UPWARD_PHASE: f64 = FRAC_PI_2;
/// Axis phase for which |k⟩ → |j⟩ picks up no phase (U_jk = sin θ/2).
const DOWNWARD_PHASE: f64 = 3.0 * FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GivensPulse {
    pub level_j: usize,
    pub level_k: usize,
    pub angle: f64,
    pub axis_phase: f64,
}

impl GivensPulse {
    pub fn new(level_j: usize, level_k: usize, angle: f64, axis_phase: f64) -> Result<Self> {
        if level_j >= level_k {
            return Err(QuditError::InvalidArgument(format!(
                "pulse levels must satisfy j < k, got ({level_j}, {level_k})"
            )));
        }
        if !angle.is_finite() || !axis_phase.is_finite() {
            return Err(QuditError::InvalidArgument("pulse angles must be finite".into()));
        }
        Ok(Self {
            level_j,
            level_k,
            angle,
            axis_phase,
        })
    }

    /// π pulse moving the population of |j⟩ onto |k⟩ with unit phase.
    pub fn transfer_up(j: usize, k: usize) -> Result<Self> {
        Self::new(j, k, PI, UPWARD_PHASE)
    }

    /// π pulse moving the population of |k⟩ onto |j⟩ with unit phase.
    pub fn transfer_down(j: usize, k: usize) -> Result<Self> {
        Self::new(j, k, PI, DOWNWARD_PHASE)
    }

    /// π/2 pulse sending |j⟩ → (|j⟩ + |k⟩)/√2.
    pub fn split(j: usize, k: usize) -> Result<Self> {
        Self::new(j, k, FRAC_PI_2, UPWARD_PHASE)
    }

    pub fn inverse(&self) -> Self {
        Self {
            angle: -self.angle,
            ..*self
        }
    }

    /// The 2×2 block [[u_jj, u_jk], [u_kj, u_kk]].
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = (self.angle / 2.0).sin_cos();
        let diag = Complex64::new(c, 0.0);
        let minus_i_s = Complex64::new(0.0, -s);
        [
            [diag, minus_i_s * Complex64::from_polar(1.0, -self.axis_phase)],
            [minus_i_s * Complex64::from_polar(1.0, self.axis_phase), diag],
        ]
    }

    fn check_levels(&self, d: usize) -> Result<()> {
        if self.level_k >= d {
            return Err(QuditError::IndexOutOfRange {
                index: self.level_k,
                dim: d,
            });
        }
        if self.level_j >= self.level_k {
            return Err(QuditError::InvalidArgument("pulse levels must satisfy j < k".into()));
        }
        Ok(())
    }

    fn apply_in_place(&self, v: &mut CVector) {
        let [[a, b], [c, e]] = self.block();
        let (j, k) = (self.level_j, self.level_k);
        let (x, y) = (v[j], v[k]);
        v[j] = a * x + b * y;
        v[k] = c * x + e * y;
    }
}

pub fn givens_unitary(d: usize, pulse: &GivensPulse) -> Result<CMatrix> {
    check_dim(d)?;
    pulse.check_levels(d)?;
    let [[a, b], [c, e]] = pulse.block();
    let (j, k) = (pulse.level_j, pulse.level_k);
    let mut u = CMatrix::identity(d, d);
    u[(j, j)] = a;
    u[(j, k)] = b;
    u[(k, j)] = c;
    u[(k, k)] = e;
    Ok(u)
}

/// Pulses applied left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    dim: usize,
    pulses: Vec<GivensPulse>,
}

impl PulseSequence {
    pub fn new(dim: usize, pulses: Vec<GivensPulse>) -> Result<Self> {
        check_dim(dim)?;
        for p in &pulses {
            p.check_levels(dim)?;
        }
        Ok(Self { dim, pulses })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pulses(&self) -> &[GivensPulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn push(&mut self, pulse: GivensPulse) -> Result<()> {
        pulse.check_levels(self.dim)?;
        self.pulses.push(pulse);
        Ok(())
    }

    /// Undoes the sequence: reversed order, negated angles.
    pub fn inverse(&self) -> Self {
        Self {
            dim: self.dim,
            pulses: self.pulses.iter().rev().map(GivensPulse::inverse).collect(),
        }
    }

    /// Product U_n ⋯ U_1 of the whole sequence.
    pub fn unitary(&self) -> CMatrix {
        let mut u = CMatrix::identity(self.dim, self.dim);
        for p in &self.pulses {
            // rows j and k only
            let [[a, b], [c, e]] = p.block();
            let (j, k) = (p.level_j, p.level_k);
            for col in 0..self.dim {
                let (x, y) = (u[(j, col)], u[(k, col)]);
                u[(j, col)] = a * x + b * y;
                u[(k, col)] = c * x + e * y;
            }
        }
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreparationTarget {
    /// Basis level |i⟩.
    Dicke(usize),
    /// (|0⟩ + |d−1⟩)/√2
    Ghz,
}

/// Pulse chain taking |0⟩ to the target.
///
/// `Dicke(i)` is a ladder of π pulses 0→1→…→i. `Ghz` is a π/2 split on (0, 1)
/// followed by π pulses carrying the |1⟩ population up to |d−1⟩. Every axis
/// phase is picked so that no relative phase accumulates.
pub fn compile_preparation(d: usize, target: PreparationTarget) -> Result<PulseSequence> {
    check_dim(d)?;
    let mut pulses = Vec::new();
    match target {
        PreparationTarget::Dicke(i) => {
            if i >= d {
                return Err(QuditError::IndexOutOfRange { index: i, dim: d });
            }
            for level in 0..i {
                pulses.push(GivensPulse::transfer_up(level, level + 1)?);
            }
        }
        PreparationTarget::Ghz => {
            pulses.push(GivensPulse::split(0, 1)?);
            for level in 1..d - 1 {
                pulses.push(GivensPulse::transfer_up(level, level + 1)?);
            }
        }
    }
    PulseSequence::new(d, pulses)
}

pub fn apply_sequence(state: &PureState, seq: &PulseSequence) -> Result<PureState> {
    check_same_dim(seq.dim(), state.dim())?;
    let mut v = state.amplitudes().clone();
    for p in seq.pulses() {
        p.apply_in_place(&mut v);
    }
    Ok(PureState::from_vector_unchecked(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, EigenDecomposition};
    use crate::qudit::{basis_state, ghz_like};

    /// exp(−i(θ/2)H) for H = cos φ X + sin φ Y through the spectral route.
    fn expm_oracle(angle: f64, phase: f64) -> CMatrix {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::from_polar(1.0, -phase),
                Complex64::from_polar(1.0, phase),
                Complex64::new(0.0, 0.0),
            ],
        );
        EigenDecomposition::of_hermitian(&h).exp_i(-angle / 2.0)
    }

    fn equal_up_to_phase(a: &CVector, b: &CVector) -> bool {
        (a.dotc(b).norm() - 1.0).abs() < 1e-12
    }

    #[test]
    fn zero_angle_is_identity() {
        let u = givens_unitary(4, &GivensPulse::new(1, 3, 0.0, 0.7).unwrap()).unwrap();
        assert!(max_abs_diff(&u, &CMatrix::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn matches_matrix_exponential() {
        for &(angle, phase) in &[(PI, 0.0), (FRAC_PI_2, 1.3), (0.4, -2.0), (3.0, PI)] {
            let u = givens_unitary(2, &GivensPulse::new(0, 1, angle, phase).unwrap()).unwrap();
            assert!(max_abs_diff(&u, &expm_oracle(angle, phase)) < 1e-12);
        }
        let u = givens_unitary(2, &GivensPulse::new(0, 1, PI, 0.0).unwrap()).unwrap();
        assert!((u[(1, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(u[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn interferometric_half_pulse_conventions() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        // φ = π: |0⟩ → (|0⟩ + i|1⟩)/√2, |1⟩ → (i|0⟩ + |1⟩)/√2
        let u = givens_unitary(2, &GivensPulse::new(0, 1, FRAC_PI_2, PI).unwrap()).unwrap();
        let col0 = CVector::from_vec(vec![Complex64::new(s, 0.0), i * s]);
        let col1 = CVector::from_vec(vec![i * s, Complex64::new(s, 0.0)]);
        assert!(equal_up_to_phase(&u.column(0).into_owned(), &col0));
        assert!(equal_up_to_phase(&u.column(1).into_owned(), &col1));
        // φ = 3π/2: |0⟩ → (|0⟩ − |1⟩)/√2, |1⟩ → (|0⟩ + |1⟩)/√2
        let u = givens_unitary(2, &GivensPulse::new(0, 1, FRAC_PI_2, 3.0 * FRAC_PI_2).unwrap()).unwrap();
        assert!((u[(0, 0)] - s).norm() < 1e-15 && (u[(1, 0)] + s).norm() < 1e-15);
        assert!((u[(0, 1)] - s).norm() < 1e-15 && (u[(1, 1)] - s).norm() < 1e-15);
        assert!(!equal_up_to_phase(&u.column(0).into_owned(), &col0));
    }

    #[test]
    fn unitary_and_local() {
        let p = GivensPulse::new(1, 4, 1.234, 0.567).unwrap();
        let u = givens_unitary(6, &p).unwrap();
        assert!(max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(6, 6)) < 1e-12);
        for untouched in [0, 2, 3, 5] {
            let mut proj = CMatrix::zeros(6, 6);
            proj[(untouched, untouched)] = Complex64::new(1.0, 0.0);
            assert!(max_abs_diff(&(&u * &proj), &(&proj * &u)) < 1e-12);
        }
    }

    #[test]
    fn invalid_pulses() {
        assert!(GivensPulse::new(2, 2, 1.0, 0.0).is_err());
        assert!(GivensPulse::new(3, 1, 1.0, 0.0).is_err());
        assert!(GivensPulse::new(0, 1, f64::NAN, 0.0).is_err());
        let p = GivensPulse::new(0, 5, 1.0, 0.0).unwrap();
        assert!(matches!(givens_unitary(4, &p), Err(QuditError::IndexOutOfRange { .. })));
    }

    #[test]
    fn ghz_compilation() {
        let seq = compile_preparation(2, PreparationTarget::Ghz).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.pulses()[0].angle, FRAC_PI_2);

        let seq = compile_preparation(5, PreparationTarget::Ghz).unwrap();
        assert_eq!(seq.len(), 4);
        assert_eq!(seq.pulses()[0].angle, FRAC_PI_2);
        assert!(seq.pulses()[1..].iter().all(|p| p.angle == PI));
        let out = apply_sequence(&basis_state(5, 0).unwrap(), &seq).unwrap();
        assert!((out.amplitudes() - ghz_like(5).unwrap().amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn dicke_compilation() {
        let seq = compile_preparation(5, PreparationTarget::Dicke(2)).unwrap();
        let out = apply_sequence(&basis_state(5, 0).unwrap(), &seq).unwrap();
        assert!((out.amplitudes() - basis_state(5, 2).unwrap().amplitudes()).norm() < 1e-12);
        assert!(compile_preparation(5, PreparationTarget::Dicke(0)).unwrap().is_empty());
        assert!(matches!(
            compile_preparation(5, PreparationTarget::Dicke(5)),
            Err(QuditError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn sequence_matches_matrix_product() {
        let seq = compile_preparation(6, PreparationTarget::Ghz).unwrap();
        let psi = basis_state(6, 0).unwrap();
        let via_matrix = seq.unitary() * psi.amplitudes();
        let via_apply = apply_sequence(&psi, &seq).unwrap();
        assert!((via_matrix - via_apply.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn empty_and_inverse() {
        let psi = ghz_like(4).unwrap();
        let out = apply_sequence(&psi, &PulseSequence::empty(4).unwrap()).unwrap();
        assert_eq!(out, psi);
        let seq = PulseSequence::new(4, vec![GivensPulse::new(1, 3, 0.9, 0.2).unwrap()]).unwrap();
        let round = apply_sequence(&apply_sequence(&psi, &seq).unwrap(), &seq.inverse()).unwrap();
        assert!((round.amplitudes() - psi.amplitudes()).norm() < 1e-12);
        assert!(matches!(
            apply_sequence(&ghz_like(3).unwrap(), &seq),
            Err(QuditError::DimensionMismatch { .. })
        ));
    }
}
