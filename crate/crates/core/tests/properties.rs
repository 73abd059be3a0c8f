//! Randomized invariants: channel CPTP and contraction, generator
//! properties, Hermiticity, filter bounds.

use faer::Mat;
use lindblad_ground::circuit::{channel_step_density, AncillaChannel, ChannelConfig, Mode};
use lindblad_ground::filter::{f_hat, FilterParams};
use lindblad_ground::linalg::{
    hermitian_eig, hermitian_part, max_abs, scale, trace, ComplexMatrix, DensityMatrix, HermitianOperator, C64,
};
use lindblad_ground::models::{ModelSpec, Problem};
use lindblad_ground::randomcoupling::{evolve_populations, random_spectrum, transition_matrix, RandomCouplingSpec};
use lindblad_ground::reference::{lindbladian_apply, LindbladSystem};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = random_matrix(n, rng);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityMatrix::new(scale(&m, C64::new(1.0 / tr, 0.0))).unwrap()
}

fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eig(&HermitianOperator::new(m.clone()).unwrap()).unwrap().eigenvalues()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn channel_is_cptp_and_contractive(g in 0.3f64..2.0, tau in 0.01f64..1.0, discrete in any::<bool>(), seed in any::<u64>()) {
        let pr = Problem::from_model(&ModelSpec::tfim(2, g)).unwrap();
        let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap()).unwrap();
        let mode = if discrete { Mode::Discrete } else { Mode::Continuous };
        let mut cfg = ChannelConfig::new(mode, tau, tau);
        cfg.segments = if discrete { 2 } else { 1 };
        let ch = AncillaChannel::new(&pr, &p, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_state(4, &mut rng), random_state(4, &mut rng));
        let (fa, _) = channel_step_density(&a, &ch).unwrap();
        let (fb, _) = channel_step_density(&b, &ch).unwrap();
        prop_assert!((trace(fa.matrix()).re - 1.0).abs() <= 1e-9);
        prop_assert!(min_eigenvalue(fa.matrix()) >= -1e-8);
        prop_assert!(fa.trace_distance(&fb).unwrap() <= a.trace_distance(&b).unwrap() + 1e-9);
        let [g0, g1] = ch.kraus();
        let completeness = g0.adjoint() * g0 + g1.adjoint() * g1;
        let n = completeness.nrows();
        let defect = Mat::from_fn(n, n, |i, j| completeness[(i, j)] - if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        prop_assert!(max_abs(&defect) <= 1e-10);
    }

    #[test]
    fn lindbladian_is_traceless_and_hermiticity_preserving(n in 2usize..6, coherent in any::<bool>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = HermitianOperator::new(hermitian_part(&random_matrix(n, &mut rng))).unwrap();
        let sys = LindbladSystem::from_matrices(&h, random_matrix(n, &mut rng), coherent).unwrap();
        let rho = random_state(n, &mut rng);
        let l = lindbladian_apply(&sys, &rho).unwrap();
        prop_assert!(trace(&l).norm() <= 1e-12);
        let adj = l.adjoint().to_owned();
        prop_assert!(max_abs(&(&l - &adj)) <= 1e-12);
    }

    #[test]
    fn transition_matrix_is_a_generator(n in 2usize..9, s in 0.05f64..3.0, seed in any::<u64>(), t in 0.0f64..20.0) {
        let e = random_spectrum(n, 0.5, 3.0, seed);
        let p = FilterParams::default_params(e[n - 1].max(1.0), e[1]).unwrap().with_clamp(true);
        let tm = transition_matrix(&e, &p, &RandomCouplingSpec::uniform(n, s).unwrap()).unwrap();
        for i in 0..n {
            let col: f64 = (0..n).map(|j| tm.get(j, i)).sum();
            prop_assert!(col.abs() <= 1e-12);
            for j in 0..n {
                if j != i {
                    prop_assert!(tm.get(j, i) >= 0.0);
                }
                if j > i {
                    prop_assert_eq!(tm.get(j, i), 0.0);
                }
            }
        }
        let p0 = vec![1.0 / n as f64; n];
        let pt = evolve_populations(&tm, &p0, t).unwrap();
        prop_assert!(pt.iter().all(|&x| x >= -1e-9));
        prop_assert!((pt.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn filter_is_bounded_and_clamp_is_exact(norm in 0.5f64..20.0, frac in 0.01f64..0.35, w in -100.0f64..100.0) {
        let p = FilterParams::default_params(norm, frac * norm).unwrap();
        let v = f_hat(w, &p);
        // the unclamped filter dips below zero by erfc-sized tails for w > 0
        prop_assert!((-1e-15..=1.0).contains(&v));
        if w >= 0.0 {
            prop_assert_eq!(f_hat(w, &p.with_clamp(true)), 0.0);
        } else {
            prop_assert_eq!(f_hat(w, &p.with_clamp(true)), v);
        }
    }

    #[test]
    fn hermitian_eig_reconstructs(n in 1usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = HermitianOperator::new(hermitian_part(&random_matrix(n, &mut rng))).unwrap();
        let s = hermitian_eig(&h).unwrap();
        prop_assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        let diag = Mat::from_fn(n, n, |i, j| if i == j { C64::new(s.eigenvalues()[i], 0.0) } else { C64::new(0.0, 0.0) });
        let back = s.from_eigenbasis(&diag);
        prop_assert!(max_abs(&(&back - h.matrix())) <= 1e-12);
    }
}
