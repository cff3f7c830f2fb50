use std::f64::consts::PI;

use nalgebra::Matrix3;
use proptest::prelude::*;
use qudit_metrology::cli::{parse_config, run};
use qudit_metrology::linalg::{max_abs_diff, CMatrix};
use qudit_metrology::protocols::{
    parse_protocol_csv, run_dicke_protocol, run_ghz_protocol, DerivativeMode, ProtocolOptions,
    ThetaGrid,
};
use qudit_metrology::qfi::{
    collective_qfi_matrix, qfi_max_collective, qfi_pure, qfi_pure_bloch, qfi_sld, qfi_spectral,
    sld, sld_residual, unitary_derivative,
};
use qudit_metrology::qudit::{
    bloch_vector, density_from_bloch, evolve, phase_generator, spin_operators, DensityMatrix,
    HermitianObservable, Propagator, QuditState, Sign,
};
use qudit_metrology::random::{random_density_matrix, random_hermitian, random_pure_state};
use qudit_metrology::GeneratorDirection;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unitary(d: usize, seed: u64) -> CMatrix {
    let h = random_hermitian(d, &mut rng(seed));
    Propagator::new(&h).unitary(0.7, Sign::Minus)
}

/// Roughly uniform directions on the sphere (Fibonacci lattice).
fn sphere_directions(count: usize) -> Vec<GeneratorDirection> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            GeneratorDirection::normalized([r * phi.cos(), r * phi.sin(), z]).unwrap()
        })
        .collect()
}

fn quadratic(m: &Matrix3<f64>, n: &GeneratorDirection) -> f64 {
    let v = nalgebra::Vector3::from(n.components());
    (v.transpose() * m * v)[(0, 0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bloch_round_trip(d in 2usize..=8, seed in any::<u64>()) {
        let rho = random_density_matrix(d, d, &mut rng(seed)).unwrap();
        let back = density_from_bloch(d, &bloch_vector(&rho)).unwrap();
        prop_assert!(max_abs_diff(back.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn evolution_is_additive(d in 2usize..=9, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let psi = random_pure_state(d, &mut r).unwrap();
        let g = random_hermitian(d, &mut r);
        let two_steps = evolve(&evolve(&psi, &g, a, Sign::Plus).unwrap(), &g, b, Sign::Plus).unwrap();
        let one_step = evolve(&psi, &g, a + b, Sign::Plus).unwrap();
        prop_assert!((two_steps.amplitudes() - one_step.amplitudes()).norm() < 1e-10);
        let back = evolve(&one_step, &g, a + b, Sign::Minus).unwrap();
        prop_assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn estimators_agree_on_pure_states(d in 2usize..=10, seed in any::<u64>(), which in 0usize..5) {
        let mut r = rng(seed);
        let psi = random_pure_state(d, &mut r).unwrap();
        let spin = spin_operators(d).unwrap();
        let g = match which {
            0 => spin.jx.clone(),
            1 => spin.jy.clone(),
            2 => spin.jz.clone(),
            3 => phase_generator(d).unwrap(),
            _ => random_hermitian(d, &mut r),
        };
        let rho = psi.to_density();
        let values = [
            qfi_pure(&psi, &g).unwrap(),
            qfi_pure_bloch(&psi, &g).unwrap(),
            qfi_sld(&rho, &g).unwrap(),
            qfi_spectral(&rho, &g).unwrap(),
        ];
        let scale = values[0].max(1.0);
        for v in values {
            prop_assert!((v - values[0]).abs() < 1e-8 * scale, "{values:?}");
        }
    }

    #[test]
    fn sld_solves_its_equation(d in 2usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, d, &mut r).unwrap();
        let g = random_hermitian(d, &mut r);
        let drho = unitary_derivative(&rho, &g).unwrap();
        let l = sld(&rho, &drho).unwrap();
        prop_assert!(sld_residual(&rho, &l, &drho) < 1e-8);
    }

    #[test]
    fn qfi_is_convex(d in 2usize..=8, seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let a = random_density_matrix(d, 1 + (seed as usize) % d, &mut r).unwrap();
        let b = random_density_matrix(d, d, &mut r).unwrap();
        let g = random_hermitian(d, &mut r);
        let mix = DensityMatrix::new(a.matrix().scale(p) + b.matrix().scale(1.0 - p)).unwrap();
        let lhs = qfi_spectral(&mix, &g).unwrap();
        let rhs = p * qfi_spectral(&a, &g).unwrap() + (1.0 - p) * qfi_spectral(&b, &g).unwrap();
        prop_assert!(lhs <= rhs + 1e-8, "{lhs} > {rhs}");
    }

    #[test]
    fn qfi_is_unitarily_covariant(d in 2usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, 2.min(d), &mut r).unwrap();
        let g = random_hermitian(d, &mut r);
        let u = random_unitary(d, seed ^ 0x5eed);
        let rotated = DensityMatrix::new(&u * rho.matrix() * u.adjoint()).unwrap();
        let g_rot = HermitianObservable::new(&u * g.matrix() * u.adjoint()).unwrap();
        let a = qfi_spectral(&rho, &g).unwrap();
        let b = qfi_spectral(&rotated, &g_rot).unwrap();
        prop_assert!((a - b).abs() < 1e-8 * a.max(1.0));
    }

    #[test]
    fn collective_maximum_dominates_sphere_search(d in 2usize..=7, seed in any::<u64>(), mixed in any::<bool>()) {
        let mut r = rng(seed);
        let rank = if mixed { d } else { 1 };
        let rho = random_density_matrix(d, rank, &mut r).unwrap();
        let (f_max, n_max) = qfi_max_collective(&rho).unwrap();
        let m = collective_qfi_matrix(&rho).unwrap();
        let spin = spin_operators(d).unwrap();
        // the quadratic form reproduces a direct evaluation
        prop_assert!((qfi_spectral(&rho, &spin.along(&n_max)).unwrap() - f_max).abs() < 1e-8 * f_max.max(1.0));
        let best = sphere_directions(500)
            .iter()
            .map(|n| quadratic(&m, n))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(best <= f_max + 1e-10);
        // 500 lattice points are within ~0.1 rad of any direction
        prop_assert!(best >= f_max * (1.0 - 0.03) - 1e-10);
    }

    #[test]
    fn analytic_slope_matches_finite_difference(d in 2usize..=9, theta in 0.05f64..3.0, ghz in any::<bool>()) {
        let grid = ThetaGrid::new(theta, theta + 0.5, 3).unwrap();
        let analytic = ProtocolOptions::default();
        let fd = ProtocolOptions { derivative_mode: DerivativeMode::FiniteDifference(1e-5), ..analytic };
        let (a, b) = if ghz {
            (run_ghz_protocol(d, &grid, &analytic).unwrap(), run_ghz_protocol(d, &grid, &fd).unwrap())
        } else {
            let i = d / 2;
            (run_dicke_protocol(d, i, &grid, &analytic).unwrap(), run_dicke_protocol(d, i, &grid, &fd).unwrap())
        };
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!((x.d_expectation - y.d_expectation).abs() < 1e-6 * (d * d) as f64);
        }
    }

    #[test]
    fn dicke_mirror_levels_give_identical_rows(d in 2usize..=12, i_frac in 0.0f64..1.0) {
        let i = ((d - 1) as f64 * i_frac) as usize;
        let grid = ThetaGrid::new(0.0, PI, 13).unwrap();
        let opts = ProtocolOptions::default();
        let a = run_dicke_protocol(d, i, &grid, &opts).unwrap();
        let b = run_dicke_protocol(d, d - 1 - i, &grid, &opts).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!((x.expectation - y.expectation).abs() < 1e-10);
            prop_assert!((x.variance - y.variance).abs() < 1e-10);
            prop_assert!((x.qfi - y.qfi).abs() < 1e-10);
        }
    }

    #[test]
    fn ghz_signal_has_period_two_pi_over_d_minus_one(d in 2usize..=12, theta in 0.0f64..3.0) {
        let period = 2.0 * PI / (d - 1) as f64;
        let grid = ThetaGrid::new(theta, theta + period, 2).unwrap();
        let r = run_ghz_protocol(d, &grid, &ProtocolOptions::default()).unwrap();
        prop_assert!((r.rows[0].expectation - r.rows[1].expectation).abs() < 1e-10);
        prop_assert!((r.rows[0].variance - r.rows[1].variance).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cli_csv_parses_back(d in 2usize..=10, count in 2usize..40, ghz in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let command = if ghz { "sweep-ghz" } else { "sweep-dicke" };
        let d_arg = d.to_string();
        let count_arg = count.to_string();
        let config = parse_config([
            "qudit-metrology", command, "--d", &d_arg, "--theta-count", &count_arg,
            "--out", dir.path().to_str().unwrap(),
        ]).unwrap();
        let (_, manifest) = run(&config).unwrap();
        let text = std::fs::read_to_string(dir.path().join(&manifest.files[0].name)).unwrap();
        let rows = parse_protocol_csv(&text).unwrap();
        prop_assert_eq!(rows.len(), count);
        for row in &rows {
            prop_assert!(row.variance >= -1e-12);
            prop_assert!(!row.precision_sq.is_finite() || row.precision_sq >= row.crb - 1e-8);
        }
    }
}
