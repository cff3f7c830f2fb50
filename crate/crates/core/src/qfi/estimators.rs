use crate::error::{QuditError, Result};
use crate::linalg::{anticommutator, commutator, ensure_hermitian, CMatrix, EigenDecomposition, I};
use crate::qudit::{DensityMatrix, HermitianObservable, PureState, QuditState};

/// Pairs with λ_i + λ_j at or below this are outside the support of ρ.
pub const DEGENERACY_TOL: f64 = 1e-12;

const INPUT_HERMITIAN_TOL: f64 = 1e-10;

/// ∂θρ = −i[G, ρ] for the encoding ρ(θ) = e^{−iθG} ρ e^{iθG}.
pub fn unitary_derivative(rho: &DensityMatrix, generator: &HermitianObservable) -> Result<CMatrix> {
    check_dims(rho.dim(), generator.dim())?;
    Ok(commutator(generator.matrix(), rho.matrix()) * (-I))
}

/// Symmetric logarithmic derivative solving ∂ρ = ½{ρ, L} on the support of ρ.
///
/// Built in the eigenbasis of ρ as L_ij = 2(∂ρ)_ij/(λ_i + λ_j); entries off the
/// support are set to zero.
pub fn sld(rho: &DensityMatrix, drho: &CMatrix) -> Result<HermitianObservable> {
    check_dims(rho.dim(), drho.nrows())?;
    ensure_hermitian(drho, INPUT_HERMITIAN_TOL)?;
    let eig = rho.spectrum();
    let mut l = eig.to_eigenbasis(drho);
    let lambda = &eig.eigenvalues;
    for r in 0..l.nrows() {
        for c in 0..l.ncols() {
            let s = lambda[r] + lambda[c];
            l[(r, c)] = if s > DEGENERACY_TOL {
                l[(r, c)] * (2.0 / s)
            } else {
                crate::linalg::ZERO
            };
        }
    }
    Ok(HermitianObservable::from_matrix_unchecked(eig.from_eigenbasis(&l)))
}

/// Tr(ρL²) with L the SLD of the unitary encoding generated by `generator`.
pub fn qfi_sld(rho: &DensityMatrix, generator: &HermitianObservable) -> Result<f64> {
    let drho = unitary_derivative(rho, generator)?;
    let l = sld(rho, &drho)?;
    let l2 = l.matrix() * l.matrix();
    let f = crate::linalg::trace_product(rho.matrix(), &l2).re;
    clamp_qfi(f)
}

/// 2 Σ_{i≠j} (λ_i − λ_j)²/(λ_i + λ_j) |⟨ψ_i|A|ψ_j⟩|²
pub fn qfi_spectral(rho: &DensityMatrix, a: &HermitianObservable) -> Result<f64> {
    check_dims(rho.dim(), a.dim())?;
    let eig = rho.spectrum();
    clamp_qfi(spectral_sum(&eig, a.matrix()))
}

pub(crate) fn spectral_weight(li: f64, lj: f64) -> f64 {
    let s = li + lj;
    if s > DEGENERACY_TOL {
        (li - lj) * (li - lj) / s
    } else {
        0.0
    }
}

fn spectral_sum(eig: &EigenDecomposition, a: &CMatrix) -> f64 {
    let a_eig = eig.to_eigenbasis(a);
    let lambda = &eig.eigenvalues;
    let mut total = 0.0;
    for i in 0..lambda.len() {
        for j in 0..lambda.len() {
            if i != j {
                total += spectral_weight(lambda[i], lambda[j]) * a_eig[(i, j)].norm_sqr();
            }
        }
    }
    2.0 * total
}

/// 4·Var(A) for a pure state.
pub fn qfi_pure(psi: &PureState, a: &HermitianObservable) -> Result<f64> {
    Ok(4.0 * psi.variance(a)?)
}

/// |∂θω|², with ∂θω_a = Tr((−i[G, ρ]) E_a).
pub fn qfi_pure_bloch(psi: &PureState, generator: &HermitianObservable) -> Result<f64> {
    let drho = unitary_derivative(&psi.to_density(), generator)?;
    let velocity = crate::qudit::gell_mann_coefficients(&drho);
    Ok(velocity.iter().map(|w| w * w).sum())
}

fn clamp_qfi(f: f64) -> Result<f64> {
    if f < -1e-10 {
        return Err(QuditError::Invariant(format!("negative QFI {f:.3e}")));
    }
    Ok(f.max(0.0))
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QuditError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// max |½{ρ, L} − ∂ρ|, the residual of the SLD equation.
pub fn sld_residual(rho: &DensityMatrix, l: &HermitianObservable, drho: &CMatrix) -> f64 {
    let lhs = anticommutator(rho.matrix(), l.matrix()).scale(0.5);
    crate::linalg::max_abs_diff(&lhs, drho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::qudit::{basis_state, ghz_like, phase_generator, spin_operators};
    use crate::random::{random_density_matrix, random_hermitian, random_pure_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_state_sld_is_twice_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = random_pure_state(5, &mut rng).unwrap();
        let rho = psi.to_density();
        let g = spin_operators(5).unwrap().jx;
        let drho = unitary_derivative(&rho, &g).unwrap();
        let l = sld(&rho, &drho).unwrap();
        assert!(max_abs_diff(l.matrix(), &drho.scale(2.0)) < 1e-10);
    }

    #[test]
    fn maximally_mixed_sld_vanishes() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let l = sld(&rho, &CMatrix::zeros(4, 4)).unwrap();
        assert!(l.matrix().iter().all(|z| z.norm() == 0.0));
        let a = spin_operators(4).unwrap().jx;
        assert_eq!(qfi_spectral(&rho, &a).unwrap(), 0.0);
    }

    #[test]
    fn rank_two_sld_equation_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_density_matrix(4, 2, &mut rng).unwrap();
        let g = spin_operators(4).unwrap().jz;
        let drho = unitary_derivative(&rho, &g).unwrap();
        let l = sld(&rho, &drho).unwrap();
        // restrict both sides to the support of ρ
        let eig = rho.spectrum();
        let support: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > 1e-12).collect();
        assert_eq!(support.len(), 2);
        let lhs = eig.to_eigenbasis(&anticommutator(rho.matrix(), l.matrix()).scale(0.5));
        let rhs = eig.to_eigenbasis(&drho);
        for &r in &support {
            for c in 0..4 {
                assert!((lhs[(r, c)] - rhs[(r, c)]).norm() < 1e-8);
                assert!((lhs[(c, r)] - rhs[(c, r)]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn full_rank_sld_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_density_matrix(5, 5, &mut rng).unwrap();
        let g = random_hermitian(5, &mut rng);
        let drho = unitary_derivative(&rho, &g).unwrap();
        let l = sld(&rho, &drho).unwrap();
        assert!(sld_residual(&rho, &l, &drho) < 1e-8);
    }

    #[test]
    fn non_hermitian_derivative_rejected() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = crate::linalg::ONE;
        assert!(matches!(sld(&rho, &m), Err(QuditError::NotHermitian { .. })));
    }

    #[test]
    fn known_values() {
        let jz = spin_operators(3).unwrap().jz;
        let rho0 = basis_state(3, 0).unwrap().to_density();
        assert!(qfi_sld(&rho0, &jz).unwrap().abs() < 1e-12);

        let ghz = ghz_like(4).unwrap();
        let p = phase_generator(4).unwrap();
        assert!((qfi_sld(&ghz.to_density(), &p).unwrap() - 9.0).abs() < 1e-10);
        assert!((qfi_spectral(&ghz.to_density(), &p).unwrap() - 9.0).abs() < 1e-10);

        // spin-1, m = 0: 2(J(J+1) − m²) = 4
        let jx = spin_operators(3).unwrap().jx;
        assert!((qfi_pure(&basis_state(3, 1).unwrap(), &jx).unwrap() - 4.0).abs() < 1e-12);
        for d in 2..=10 {
            let jx = spin_operators(d).unwrap().jx;
            let f = qfi_pure(&basis_state(d, 0).unwrap(), &jx).unwrap();
            assert!((f - (d - 1) as f64).abs() < 1e-12);
            let p = phase_generator(d).unwrap();
            let f = qfi_pure(&ghz_like(d).unwrap(), &p).unwrap();
            assert!((f - ((d - 1) * (d - 1)) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn bloch_estimator_known_values() {
        let jz = spin_operators(2).unwrap().jz;
        // |+⟩ rotating about z traces the equator at unit speed: |∂ω|² = 1
        let plus = crate::qudit::PureState::normalized(
            crate::linalg::CVector::from_vec(vec![crate::linalg::ONE, crate::linalg::ONE]),
        )
        .unwrap();
        assert!((qfi_pure_bloch(&plus, &jz).unwrap() - 1.0).abs() < 1e-12);
        let jz5 = spin_operators(5).unwrap().jz;
        assert!(qfi_pure_bloch(&basis_state(5, 2).unwrap(), &jz5).unwrap().abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_pure_state(5, &mut rng).unwrap();
        let jy = spin_operators(5).unwrap().jy;
        let a = qfi_pure_bloch(&psi, &jy).unwrap();
        let b = qfi_pure(&psi, &jy).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn random_pure_cross_estimators() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random_pure_state(6, &mut rng).unwrap();
        let g = random_hermitian(6, &mut rng);
        let rho = psi.to_density();
        let reference = qfi_pure(&psi, &g).unwrap();
        assert!((qfi_sld(&rho, &g).unwrap() - reference).abs() < 1e-8);
        assert!((qfi_spectral(&rho, &g).unwrap() - reference).abs() < 1e-8);
    }
}
