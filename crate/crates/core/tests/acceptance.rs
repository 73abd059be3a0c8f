//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every verdict is printed; exits nonzero if any criterion fails.

use std::time::Instant;

use faer::Mat;
use lindblad_ground::circuit::{
    build_w, channel_step_density, frame_unitary, naive_trotter_product, run_simulation, AncillaChannel, Backend,
    ChannelConfig, InitialState, Mode, SimulationRecord,
};
use lindblad_ground::filter::FilterParams;
use lindblad_ground::jump::{dilate, dilate_matrix, exact_jump, quadrature_jump};
use lindblad_ground::linalg::{
    conjugate, hermitian_eig, identity, kron, max_abs_diff, operator_norm, scale, trace, trace_norm, DensityMatrix,
    HermitianOperator, C64,
};
use lindblad_ground::models::{ModelSpec, Problem};
use lindblad_ground::randomcoupling::{
    concentration_experiment, ergodicity_experiment, MonteCarlo, RandomCouplingSpec,
};
use lindblad_ground::reference::{evolve_superoperator, exact_dilated_step, exact_dissipative_step, LindbladSystem};
use lindblad_ground::stats::loglog_slope;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn instance(model: ModelSpec, clamp: bool) -> (Problem, FilterParams) {
    let pr = Problem::from_model(&model).unwrap();
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap()).unwrap().with_clamp(clamp);
    (pr, p)
}

fn tfim(l: usize) -> (Problem, FilterParams) {
    instance(ModelSpec::tfim(l, 1.2), false)
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityMatrix::new(scale(&m, C64::new(1.0 / tr, 0.0))).unwrap()
}

fn verdict(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn slope_verdict(taus: &[f64], errs: &[f64], target: f64, tol: f64) -> Verdict {
    let s = loglog_slope(taus, errs);
    verdict((s - target).abs() <= tol, format!("slope {s:.3} (want {target} +- {tol})"))
}

fn tfim4(mode: Mode) -> SimulationRecord {
    let (pr, p) = tfim(4);
    let tau = if mode == Mode::Continuous { 0.1 } else { 1.0 };
    let mut cfg = ChannelConfig::new(mode, tau, 80.0);
    cfg.reps = 100;
    cfg.seed = 2024;
    cfg.initial_state = InitialState::HighestExcited;
    run_simulation(&pr, &cfg, &p).unwrap()
}

fn criterion_1(cont: &SimulationRecord) -> Verdict {
    let last = cont.last();
    let excess = last.energy_mean - cont.ground_energy;
    verdict(
        last.overlap_mean >= 0.9 && excess <= 0.1 * cont.gap(),
        format!("TFIM-4 continuous final overlap {:.4}, E - lambda_0 = {excess:.4} (limit {:.4})", last.overlap_mean, 0.1 * cont.gap()),
    )
}

fn criterion_2(cont: &SimulationRecord, disc: &SimulationRecord) -> Verdict {
    let (Some(c), Some(d)) = (cont.first_reaching(0.9), disc.first_reaching(0.9)) else {
        return Err(format!(
            "overlap 0.9 not reached (continuous {:.4}, discrete {:.4})",
            cont.last().overlap_mean,
            disc.last().overlap_mean
        ));
    };
    let ratio = d.h_time / c.h_time;
    verdict(
        ratio <= 0.2 && disc.last().overlap_mean >= 0.9,
        format!("h_time to overlap 0.9: discrete {:.0} vs continuous {:.0}, ratio {ratio:.3}", d.h_time, c.h_time),
    )
}

fn criterion_3() -> Verdict {
    let (pr, p) = instance(ModelSpec::hubbard(4, 1.0, 4.0), false);
    let mut cfg = ChannelConfig::new(Mode::Discrete, 0.5, 100.0);
    cfg.segments = 2;
    cfg.reps = 100;
    cfg.seed = 2024;
    cfg.record_stride = 20;
    let rec = run_simulation(&pr, &cfg, &p).unwrap();
    let o = rec.last().overlap_mean;
    verdict(o >= 0.85, format!("Hubbard-4 discrete final overlap {o:.4}"))
}

fn criterion_4() -> Verdict {
    let (pr, p) = tfim(2);
    let k = quadrature_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
    let kt = dilate(&k);
    let rho = random_state(4, &mut ChaCha8Rng::seed_from_u64(101));
    let taus = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let errs: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let a = exact_dilated_step(&kt, &rho, t).unwrap();
            let b = exact_dissipative_step(&k, &rho, t).unwrap();
            trace_norm(&(a.matrix() - b.matrix())).unwrap()
        })
        .collect();
    slope_verdict(&taus, &errs, 2.0, 0.2)
}

fn criterion_5() -> Verdict {
    let (pr, p) = tfim(4);
    let k = exact_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
    let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
    let err = operator_norm(&(k.matrix() - ks.matrix())).unwrap() / operator_norm(pr.coupling.matrix()).unwrap();
    let wide = quadrature_jump(&pr.spectrum, &pr.coupling, &p.with_truncation(2.0 * p.s_s()).unwrap()).unwrap();
    let change = operator_norm(&(ks.matrix() - wide.matrix())).unwrap();
    verdict(
        err <= 1e-3 && change <= 1e-6,
        format!("|K - K_s|/|A| = {err:.2e} (<= 1e-3), change on doubling S_s = {change:.2e} (<= 1e-6)"),
    )
}

fn criterion_6() -> Verdict {
    let (pr, p) = tfim(4);
    let tau = 0.3;
    let w = build_w(&pr.spectrum, &pr.coupling, &p, tau).unwrap();
    let naive = naive_trotter_product(&pr.spectrum, &pr.coupling, &p, tau).unwrap();
    let f = kron(&identity(2), &frame_unitary(&pr.spectrum, &p));
    let d = max_abs_diff(&w, &conjugate(&f, &naive));
    verdict(d <= 1e-10, format!("max |W - F naive F^dag| = {d:.2e}"))
}

fn criterion_7() -> Verdict {
    let (pr, p) = tfim(2);
    let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
    let kt = dilate_matrix(&conjugate(&frame_unitary(&pr.spectrum, &p), ks.matrix()));
    let rho = random_state(4, &mut ChaCha8Rng::seed_from_u64(107));
    let taus = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let errs: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let mut cfg = ChannelConfig::new(Mode::Continuous, tau, tau);
            cfg.include_coherent = false;
            let ch = AncillaChannel::new(&pr, &p, &cfg).unwrap();
            let a = channel_step_density(&rho, &ch).unwrap().0;
            trace_norm(&(a.matrix() - exact_dilated_step(&kt, &rho, tau).unwrap().matrix())).unwrap()
        })
        .collect();
    slope_verdict(&taus, &errs, 2.0, 0.25)
}

fn criterion_8() -> Verdict {
    let (pr, p) = tfim(2);
    let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
    let kf = conjugate(&frame_unitary(&pr.spectrum, &p), ks.matrix());
    let sys = LindbladSystem::from_matrices(&pr.hamiltonian, kf, true).unwrap();
    let rho = random_state(4, &mut ChaCha8Rng::seed_from_u64(108));
    let exact = evolve_superoperator(&sys, &rho, 2.0).unwrap();
    let taus = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let ch = AncillaChannel::new(&pr, &p, &ChannelConfig::new(Mode::Continuous, tau, 2.0)).unwrap();
            let mut cur = rho.clone();
            for _ in 0..(2.0 / tau).round() as usize {
                cur = channel_step_density(&cur, &ch).unwrap().0;
            }
            cur.trace_distance(&exact).unwrap()
        })
        .collect();
    slope_verdict(&taus, &errs, 1.0, 0.25)
}

fn criterion_9() -> Verdict {
    let (pr, p) = tfim(4);
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let (mut drift, mut min_eig, mut grow) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for cfg in [ChannelConfig::new(Mode::Continuous, 0.1, 0.1), ChannelConfig::new(Mode::Discrete, 1.0, 1.0)] {
        let ch = AncillaChannel::new(&pr, &p, &cfg).unwrap();
        for _ in 0..50 {
            let (a, b) = (random_state(16, &mut rng), random_state(16, &mut rng));
            let (fa, fb) = (ch.apply_matrix(a.matrix()), ch.apply_matrix(b.matrix()));
            for m in [&fa, &fb] {
                drift = drift.max((trace(m).re - 1.0).abs());
                let ev = hermitian_eig(&HermitianOperator::new(m.clone()).unwrap()).unwrap();
                min_eig = min_eig.min(ev.eigenvalues()[0]);
            }
            grow = grow.max(0.5 * trace_norm(&(&fa - &fb)).unwrap() - a.trace_distance(&b).unwrap());
        }
    }
    verdict(
        drift <= 1e-9 && min_eig >= -1e-8 && grow <= 1e-9,
        format!("trace drift {drift:.1e}, min eigenvalue {min_eig:.1e}, max distance growth {grow:.1e}"),
    )
}

fn criterion_10() -> Verdict {
    let e = vec![0.0, 1.0, 1.4, 1.9, 2.3, 2.8, 3.1, 3.5];
    let p = FilterParams::default_params(3.5, 1.0).unwrap().with_clamp(true);
    let sig = RandomCouplingSpec::uniform(8, 0.03).unwrap();
    let mc = MonteCarlo { reps: 500, tau: 0.01, seed: 1 };
    let r = ergodicity_experiment(&e, &p, &sig, &[0.125; 8], &mc, 20.0, 10).unwrap();
    verdict(
        r.max_z <= 3.0 && r.long_time_deviation <= 1e-6,
        format!("N=8: max z {:.2} over 10 checkpoints, long-time distance to e0 {:.1e}", r.max_z, r.long_time_deviation),
    )
}

fn criterion_11() -> Verdict {
    let e = [0.0, 1.0, 1.7, 2.5];
    let p = FilterParams::default_params(2.5, 1.0).unwrap().with_clamp(true);
    let sig = RandomCouplingSpec::uniform(4, 1.0).unwrap();
    let taus = [0.1, 0.05, 0.025, 0.0125];
    let r = concentration_experiment(&e, &p, &sig, &[0.0, 0.0, 0.0, 1.0], &taus, 2.0, 200, 7).unwrap();
    verdict((0.4..=0.7).contains(&r.slope), format!("N=4, 200 reps: deviation slope {:.3}", r.slope))
}

fn criterion_12() -> Verdict {
    let (pr, p) = instance(ModelSpec::tfim(4, 1.2), true);
    let mut cfg = ChannelConfig::new(Mode::Discrete, 1.0, 100.0);
    cfg.backend = Backend::Density;
    let ch = AncillaChannel::new(&pr, &p, &cfg).unwrap();
    let g = DensityMatrix::from_pure(&pr.spectrum.ground_state()).unwrap();
    let mut rho = g.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        rho = channel_step_density(&rho, &ch).unwrap().0;
        worst = worst.max(rho.trace_distance(&g).unwrap());
    }
    verdict(worst <= 2e-2, format!("max trace distance from the ground state over 100 steps {worst:.2e}"))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, start: Instant, v: Verdict| {
        let secs = start.elapsed().as_secs_f64();
        match v {
            Ok(m) => println!("[PASS] criterion {n}: {m} ({secs:.1}s)"),
            Err(m) => {
                failed += 1;
                println!("[FAIL] criterion {n}: {m} ({secs:.1}s)");
            }
        }
    };
    let t = Instant::now();
    let cont = tfim4(Mode::Continuous);
    report(1, t, criterion_1(&cont));
    let t = Instant::now();
    let disc = tfim4(Mode::Discrete);
    report(2, t, criterion_2(&cont, &disc));
    let plain: [(usize, fn() -> Verdict); 10] = [
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    for (n, f) in plain {
        let t = Instant::now();
        report(n, t, f());
    }
    if failed > 0 {
        println!("{failed} of 12 criteria failed");
        std::process::exit(1);
    }
}
