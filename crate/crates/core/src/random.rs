//! Seeded random states and operators for sweeps and property checks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::direction::GeneratorDirection;
use crate::error::Result;
use crate::linalg::{CMatrix, CVector};
use crate::qudit::{spin_coherent, DensityMatrix, HermitianObservable, PureState};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed pure state (normalized complex Gaussian vector).
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PureState> {
    PureState::normalized(CVector::from_fn(d, |_, _| gaussian_complex(rng)))
}

/// G·G†/Tr with G a d×rank complex Gaussian matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| gaussian_complex(rng));
    let m = &g * g.adjoint();
    let trace = m.trace().re;
    DensityMatrix::new(m.unscale(trace))
}

/// Gaussian unitary ensemble sample.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianObservable {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    HermitianObservable::from_matrix_unchecked((&g + g.adjoint()).scale(0.5))
}

/// Uniform on the unit sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> GeneratorDirection {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(n) = GeneratorDirection::normalized(v) {
            return n;
        }
    }
}

/// Spin-coherent state with a uniformly random orientation.
pub fn random_spin_coherent<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PureState> {
    let polar = (1.0 - 2.0 * rng.random::<f64>()).acos();
    let azimuth = std::f64::consts::TAU * rng.random::<f64>();
    spin_coherent(d, polar, azimuth)
}
