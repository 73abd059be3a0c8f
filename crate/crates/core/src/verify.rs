//! Self-checks behind `lindblad-ground verify`.
//!
//! The fast level runs oracle and scaling checks on instances of dimension at
//! most 16. The full level adds the end-to-end ground-state runs and the
//! random-coupling Monte Carlo experiments. Each check reports the measured
//! value next to the bound it is held to.

use std::str::FromStr;
use std::time::Instant;

use faer::Mat;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{
    build_w, channel_step_density, frame_unitary, naive_trotter_product, run_simulation, AncillaChannel, Backend,
    ChannelConfig, InitialState, Mode, SimulationRecord,
};
use crate::filter::{f_hat, f_time, quadrature_grid, FilterParams};
use crate::jump::{dilate, dilate_matrix, exact_jump, quadrature_jump, quadrature_jump_on_grid};
use crate::linalg::{
    conjugate, hermitian_eig, identity, kron, max_abs_diff, operator_norm, scale, trace, trace_norm,
    DensityMatrix, HermitianOperator, C64,
};
use crate::models::{number_operator, spin_z_operator, build_hubbard_1d, ModelSpec, Problem};
use crate::randomcoupling::{
    concentration_experiment, ergodicity_experiment, transition_matrix, MonteCarlo, RandomCouplingSpec,
};
use crate::reference::{evolve_superoperator, exact_dilated_step, exact_dissipative_step, LindbladSystem};
use crate::stats::loglog_slope;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(Error::Config(format!("unknown verify level '{s}' (expected fast or full)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub bound: String,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {} (value {:.4e}, bound {}) {:.1}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.value,
            self.bound,
            self.seconds
        )
    }
}

/// Measured value, pass flag and a one-line description.
struct Outcome {
    passed: bool,
    value: f64,
    detail: String,
}

fn check(name: &'static str, bound: &str, f: impl FnOnce() -> Result<Outcome>) -> CheckResult {
    let start = Instant::now();
    let (passed, value, detail) = match f() {
        Ok(o) => (o.passed, o.value, o.detail),
        Err(e) => (false, f64::NAN, format!("error: {e}")),
    };
    CheckResult { name, passed, value, bound: bound.to_string(), detail, seconds: start.elapsed().as_secs_f64() }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub mutation: bool,
    pub passed: bool,
    pub failures: Vec<&'static str>,
    pub checks: Vec<CheckResult>,
}

/// Runs every check of `level`. With `mutation` the quadrature weights for
/// negative nodes change sign, which the quadrature check must catch.
pub fn run_verify(level: Level, mutation: bool) -> VerifyReport {
    let mut checks = vec![
        spectrum_oracles(),
        filter_kernel_oracle(),
        quadrature_error(mutation),
        dilation_lemma_scaling(),
        cancellation_identity(),
        channel_trotter_order(),
        global_first_order(),
        channel_cptp(),
        fixed_point_stability(),
        transition_generator(),
    ];
    for c in &checks {
        log::info!("{}", c.line());
    }
    if level == Level::Full {
        let mut more = vec![quadrature_saturation()];
        log::info!("{}", more[0].line());
        let cont = tfim4_run(Mode::Continuous);
        let disc = tfim4_run(Mode::Discrete);
        more.push(tfim4_convergence(&cont));
        more.push(discrete_cost_advantage(&cont, &disc));
        more.push(hubbard4_discrete());
        more.push(hubbard4_continuous());
        more.push(ergodicity());
        more.push(concentration_slope());
        more.push(concentration_clt());
        for c in &more[1..] {
            log::info!("{}", c.line());
        }
        checks.extend(more);
    }
    let failures: Vec<&'static str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    VerifyReport { level, mutation, passed: failures.is_empty(), failures, checks }
}

pub fn tfim_instance(sites: usize, clamp: bool) -> Result<(Problem, FilterParams)> {
    let pr = Problem::from_model(&ModelSpec::tfim(sites, 1.2))?;
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap())?.with_clamp(clamp);
    Ok((pr, p))
}

pub fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityMatrix::new(scale(&m, C64::new(1.0 / tr, 0.0))).expect("Gram matrix is a valid state")
}

fn slope_outcome(taus: &[f64], errs: &[f64], target: f64, tol: f64) -> Outcome {
    let slope = loglog_slope(taus, errs);
    Outcome {
        passed: (slope - target).abs() <= tol,
        value: slope,
        detail: format!("log-log slope {slope:.3} over errors {}", fmt_list(errs)),
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", v.join(", "))
}

/// TFIM-2 ground energy against `-sqrt(1 + 4 g^2)` and conservation of
/// particle number and `S_z` by the two-site Hubbard Hamiltonian.
pub fn spectrum_oracles() -> CheckResult {
    check("spectrum_oracles", "<= 1e-12", || {
        let g = 1.2f64;
        let pr = Problem::from_model(&ModelSpec::tfim(2, g))?;
        let e0 = pr.spectrum.ground_energy();
        let d1 = (e0 + (1.0 + 4.0 * g * g).sqrt()).abs();
        let h = build_hubbard_1d(2, 1.0, 4.0)?;
        let comm = |o: &HermitianOperator| max_abs_diff(&(h.matrix() * o.matrix()), &(o.matrix() * h.matrix()));
        let d2 = comm(&number_operator(2)?).max(comm(&spin_z_operator(2)?));
        let v = d1.max(d2);
        Ok(Outcome { passed: v <= 1e-12, value: v, detail: format!("TFIM-2 ground {e0:.12}, max commutator {d2:.1e}") })
    })
}

/// `f(s)` against Simpson integration of `f_hat(w) e^{-iws} / (2 pi)`.
pub fn filter_kernel_oracle() -> CheckResult {
    check("filter_kernel_oracle", "<= 1e-8", || {
        let p = FilterParams::default_params(4.0, 1.0)?;
        let (lo, hi) = (-p.a() - 8.0 * p.delta_a(), -p.b() + 8.0 * p.delta_b());
        let panels = 20_000;
        let h = (hi - lo) / panels as f64;
        let mut worst: f64 = 0.0;
        for &s in &[0.0, 0.3, -1.1, 2.7, -6.0] {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..=panels {
                let w = lo + h * k as f64;
                let c = if k == 0 || k == panels { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += C64::from_polar(c * f_hat(w, &p), -w * s);
            }
            let want = acc * (h / 3.0 / (2.0 * std::f64::consts::PI));
            worst = worst.max((f_time(s, &p) - want).norm());
        }
        Ok(Outcome { passed: worst <= 1e-8, value: worst, detail: format!("max kernel deviation {worst:.2e}") })
    })
}

/// `|K - K_s| <= 1e-3 |A|` on TFIM-4 under the default rule.
pub fn quadrature_error(mutation: bool) -> CheckResult {
    check("quadrature_convergence", "<= 1e-3", move || {
        let (pr, p) = tfim_instance(4, false)?;
        let k = exact_jump(&pr.spectrum, &pr.coupling, &p)?;
        let mut grid = quadrature_grid(&p);
        if mutation {
            for (w, s) in grid.weights.iter_mut().zip(&grid.nodes) {
                if *s < 0.0 {
                    *w = -*w;
                }
            }
        }
        let ks = quadrature_jump_on_grid(&pr.spectrum, &pr.coupling, &p, &grid)?;
        let rel = operator_norm(&(k.matrix() - ks.matrix()))? / operator_norm(pr.coupling.matrix())?;
        Ok(Outcome {
            passed: rel <= 1e-3,
            value: rel,
            detail: format!("|K - K_s| / |A| = {rel:.3e} with M_s = {}{}", p.m_s(), if mutation { " (mutated weights)" } else { "" }),
        })
    })
}

/// Doubling `S_s` at fixed spacing should leave `K_s` unchanged to 1e-6.
pub fn quadrature_saturation() -> CheckResult {
    check("quadrature_saturation", "<= 1e-6", || {
        let (pr, p) = tfim_instance(4, false)?;
        let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p)?;
        let wide = p.with_truncation(2.0 * p.s_s())?;
        let kw = quadrature_jump(&pr.spectrum, &pr.coupling, &wide)?;
        let d = operator_norm(&(ks.matrix() - kw.matrix()))?;
        let k = exact_jump(&pr.spectrum, &pr.coupling, &p)?;
        let e = operator_norm(&(kw.matrix() - k.matrix()))?;
        Ok(Outcome {
            passed: d <= 1e-6,
            value: d,
            detail: format!("|K_s(2 S_s) - K_s(S_s)| = {d:.3e}; |K - K_s(2 S_s)| = {e:.3e}"),
        })
    })
}

/// Dilated step against `e^{L_K tau}` on TFIM-2: error slope 2 in `tau`.
pub fn dilation_lemma_scaling() -> CheckResult {
    check("dilation_lemma_scaling", "slope 2.0 +- 0.2", || {
        let (pr, p) = tfim_instance(2, false)?;
        let k = quadrature_jump(&pr.spectrum, &pr.coupling, &p)?;
        let kt = dilate(&k);
        let rho = random_density(4, &mut ChaCha8Rng::seed_from_u64(11));
        let taus = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
        let errs = taus
            .iter()
            .map(|&t| trace_norm(&(exact_dilated_step(&kt, &rho, t)?.matrix() - exact_dissipative_step(&k, &rho, t)?.matrix())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(slope_outcome(&taus, &errs, 2.0, 0.2))
    })
}

/// `W` from the cancelled product against the naive product of dense
/// factors, conjugated by the frame rotation, on TFIM-4.
pub fn cancellation_identity() -> CheckResult {
    check("cancellation_identity", "<= 1e-10", || {
        let (pr, p) = tfim_instance(4, false)?;
        let tau = 0.3;
        let w = build_w(&pr.spectrum, &pr.coupling, &p, tau)?;
        let naive = naive_trotter_product(&pr.spectrum, &pr.coupling, &p, tau)?;
        let f = kron(&identity(2), &frame_unitary(&pr.spectrum, &p));
        let d = max_abs_diff(&w, &conjugate(&f, &naive));
        let u = max_abs_diff(&(w.adjoint() * &w), &identity(w.nrows()));
        Ok(Outcome {
            passed: d <= 1e-10 && u <= 1e-10,
            value: d,
            detail: format!("max entry deviation {d:.2e}, unitarity defect {u:.2e}"),
        })
    })
}

/// One channel step without the coherent part against the exact dilated step
/// of the frame-rotated `K_s`, on TFIM-2.
pub fn channel_trotter_order() -> CheckResult {
    check("channel_trotter_order", "slope 2.0 +- 0.25", || {
        let (pr, p) = tfim_instance(2, false)?;
        let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p)?;
        let kt = dilate_matrix(&conjugate(&frame_unitary(&pr.spectrum, &p), ks.matrix()));
        let rho = random_density(4, &mut ChaCha8Rng::seed_from_u64(12));
        let taus = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
        let errs = taus
            .iter()
            .map(|&tau| {
                let mut cfg = ChannelConfig::new(Mode::Continuous, tau, tau);
                cfg.include_coherent = false;
                let ch = AncillaChannel::new(&pr, &p, &cfg)?;
                let (a, _) = channel_step_density(&rho, &ch)?;
                trace_norm(&(a.matrix() - exact_dilated_step(&kt, &rho, tau)?.matrix()))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(slope_outcome(&taus, &errs, 2.0, 0.25))
    })
}

/// The composed scheme at `T = 2` against the exact modified dynamics with
/// jump `F K_s F^dag`, on TFIM-2: trace-distance slope 1 in `tau`.
pub fn global_first_order() -> CheckResult {
    check("global_first_order", "slope 1.0 +- 0.25", || {
        let (pr, p) = tfim_instance(2, false)?;
        let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p)?;
        let kf = conjugate(&frame_unitary(&pr.spectrum, &p), ks.matrix());
        let sys = LindbladSystem::from_matrices(&pr.hamiltonian, kf, true)?;
        let rho = random_density(4, &mut ChaCha8Rng::seed_from_u64(13));
        let t_final = 2.0;
        let exact = evolve_superoperator(&sys, &rho, t_final)?;
        let taus = [0.1, 0.05, 0.025, 0.0125];
        let errs = taus
            .iter()
            .map(|&tau| {
                let ch = AncillaChannel::new(&pr, &p, &ChannelConfig::new(Mode::Continuous, tau, t_final))?;
                let mut cur = rho.clone();
                for _ in 0..(t_final / tau).round() as usize {
                    cur = channel_step_density(&cur, &ch)?.0;
                }
                cur.trace_distance(&exact)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(slope_outcome(&taus, &errs, 1.0, 0.25))
    })
}

/// Trace, positivity and contractivity of single channel steps on 50 random
/// state pairs, for the continuous and the discrete TFIM-4 channels.
pub fn channel_cptp() -> CheckResult {
    check("channel_cptp", "trace 1e-9, eigenvalues >= -1e-8, contraction 1e-9", || {
        let (pr, p) = tfim_instance(4, false)?;
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (mut trace_dev, mut min_eig, mut expansion) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
        for cfg in [ChannelConfig::new(Mode::Continuous, 0.1, 0.1), ChannelConfig::new(Mode::Discrete, 1.0, 1.0)] {
            let ch = AncillaChannel::new(&pr, &p, &cfg)?;
            for _ in 0..50 {
                let (r1, r2) = (random_density(16, &mut rng), random_density(16, &mut rng));
                let (o1, o2) = (ch.apply_matrix(r1.matrix()), ch.apply_matrix(r2.matrix()));
                for o in [&o1, &o2] {
                    trace_dev = trace_dev.max((trace(o).re - 1.0).abs());
                    min_eig = min_eig.min(hermitian_eig(&HermitianOperator::new(o.clone())?)?.eigenvalues()[0]);
                }
                let before = r1.trace_distance(&r2)?;
                let after = 0.5 * trace_norm(&(&o1 - &o2))?;
                expansion = expansion.max(after - before);
            }
        }
        Ok(Outcome {
            passed: trace_dev <= 1e-9 && min_eig >= -1e-8 && expansion <= 1e-9,
            value: trace_dev.max(-min_eig.min(0.0)).max(expansion.max(0.0)),
            detail: format!("trace drift {trace_dev:.1e}, min eigenvalue {min_eig:.1e}, max expansion {expansion:.1e}"),
        })
    })
}

/// 100 discrete steps at `tau = 1` from the ground state with the clamped
/// filter stay within trace distance 2e-2 of it.
pub fn fixed_point_stability() -> CheckResult {
    check("fixed_point_stability", "<= 2e-2", || {
        let (pr, p) = tfim_instance(4, true)?;
        let mut cfg = ChannelConfig::new(Mode::Discrete, 1.0, 100.0);
        cfg.backend = Backend::Density;
        let ch = AncillaChannel::new(&pr, &p, &cfg)?;
        let ground = DensityMatrix::from_pure(&pr.spectrum.ground_state())?;
        let mut rho = ground.clone();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            rho = channel_step_density(&rho, &ch)?.0;
            worst = worst.max(rho.trace_distance(&ground)?);
        }
        Ok(Outcome { passed: worst <= 2e-2, value: worst, detail: format!("max trace distance {worst:.3e} over 100 steps") })
    })
}

/// Columns of the random-coupling generator sum to zero and `e_0` is null.
pub fn transition_generator() -> CheckResult {
    check("transition_generator", "<= 1e-12", || {
        let e = ergodicity_spectrum();
        let p = FilterParams::default_params(3.5, 1.0)?.with_clamp(true);
        let t = transition_matrix(&e, &p, &RandomCouplingSpec::uniform(e.len(), 0.7)?)?;
        let n = e.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max((0..n).map(|j| t.get(j, i)).sum::<f64>().abs());
            worst = worst.max(t.get(i, 0).abs());
            for j in i + 1..n {
                worst = worst.max(t.get(j, i).abs());
            }
        }
        Ok(Outcome { passed: worst <= 1e-12, value: worst, detail: format!("max generator defect {worst:.1e}") })
    })
}

/// The TFIM-4 run used for the end-to-end checks: continuous `tau = 0.1`
/// or discrete `tau = 1, r = 1`, `T = 80`, 100 trajectories from the top
/// eigenstate.
pub fn tfim4_run(mode: Mode) -> Result<SimulationRecord> {
    let (pr, p) = tfim_instance(4, false)?;
    let tau = if mode == Mode::Continuous { 0.1 } else { 1.0 };
    let mut cfg = ChannelConfig::new(mode, tau, 80.0);
    cfg.initial_state = InitialState::HighestExcited;
    cfg.reps = 100;
    cfg.seed = 2024;
    run_simulation(&pr, &cfg, &p)
}

pub fn tfim4_convergence(rec: &Result<SimulationRecord>) -> CheckResult {
    check("tfim4_continuous_convergence", "overlap >= 0.9, energy gap <= 0.1 gap", || {
        let rec = rec.as_ref().map_err(|e| Error::InvalidState(e.to_string()))?;
        let last = rec.last();
        let excess = last.energy_mean - rec.ground_energy;
        Ok(Outcome {
            passed: last.overlap_mean >= 0.9 && excess <= 0.1 * rec.gap(),
            value: last.overlap_mean,
            detail: format!(
                "final overlap {:.4} +- {:.4}, E - lambda_0 = {excess:.4} vs 0.1 gap = {:.4}",
                last.overlap_mean,
                last.overlap_se,
                0.1 * rec.gap()
            ),
        })
    })
}

/// Hamiltonian time when the mean overlap first reaches 0.9, discrete over
/// continuous.
pub fn discrete_cost_advantage(cont: &Result<SimulationRecord>, disc: &Result<SimulationRecord>) -> CheckResult {
    check("discrete_cost_advantage", "ratio <= 0.2", || {
        let cont = cont.as_ref().map_err(|e| Error::InvalidState(e.to_string()))?;
        let disc = disc.as_ref().map_err(|e| Error::InvalidState(e.to_string()))?;
        let (Some(c), Some(d)) = (cont.first_reaching(0.9), disc.first_reaching(0.9)) else {
            return Ok(Outcome {
                passed: false,
                value: f64::NAN,
                detail: format!(
                    "overlap 0.9 not reached (final continuous {:.4}, discrete {:.4})",
                    cont.last().overlap_mean,
                    disc.last().overlap_mean
                ),
            });
        };
        let ratio = d.h_time / c.h_time;
        Ok(Outcome {
            passed: ratio <= 0.2,
            value: ratio,
            detail: format!(
                "overlap 0.9 at h_time {:.1} (discrete, t = {}) vs {:.1} (continuous, t = {}); final {:.4} vs {:.4}",
                d.h_time,
                d.time,
                c.h_time,
                c.time,
                disc.last().overlap_mean,
                cont.last().overlap_mean
            ),
        })
    })
}

fn hubbard4(mode: Mode, tau: f64, segments: usize) -> Result<SimulationRecord> {
    let pr = Problem::from_model(&ModelSpec::hubbard(4, 1.0, 4.0))?;
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap())?;
    let mut cfg = ChannelConfig::new(mode, tau, 100.0);
    cfg.segments = segments;
    cfg.reps = 100;
    cfg.seed = 2024;
    cfg.record_stride = ((1.0 / tau).round() as usize).max(1);
    run_simulation(&pr, &cfg, &p)
}

pub fn hubbard4_discrete() -> CheckResult {
    check("hubbard4_discrete", "overlap >= 0.85", || {
        let rec = hubbard4(Mode::Discrete, 0.5, 2)?;
        let last = rec.last();
        Ok(Outcome {
            passed: last.overlap_mean >= 0.85,
            value: last.overlap_mean,
            detail: format!("final overlap {:.4} +- {:.4}, E - lambda_0 = {:.4}", last.overlap_mean, last.overlap_se, last.energy_mean - rec.ground_energy),
        })
    })
}

pub fn hubbard4_continuous() -> CheckResult {
    check("hubbard4_continuous", "overlap >= 0.85", || {
        let rec = hubbard4(Mode::Continuous, 0.025, 1)?;
        let last = rec.last();
        Ok(Outcome {
            passed: last.overlap_mean >= 0.85,
            value: last.overlap_mean,
            detail: format!("final overlap {:.4} +- {:.4}", last.overlap_mean, last.overlap_se),
        })
    })
}

/// Eight levels with unit gap and uneven spacing above it.
pub fn ergodicity_spectrum() -> Vec<f64> {
    vec![0.0, 1.0, 1.4, 1.9, 2.3, 2.8, 3.1, 3.5]
}

/// Uniform variance used by the ergodicity check. Per-step resampling
/// carries an O(tau) bias relative to the expectation dynamics, so the
/// coupling is kept weak enough that the bias stays below the Monte Carlo
/// noise of 500 repetitions.
pub const ERGODICITY_SIGMA: f64 = 0.03;
pub const ERGODICITY_SEED: u64 = 1;

pub fn ergodicity() -> CheckResult {
    check("ergodicity", "max z <= 3, long-time deviation <= 1e-6", || {
        let e = ergodicity_spectrum();
        let p = FilterParams::default_params(3.5, 1.0)?.with_clamp(true);
        let sig = RandomCouplingSpec::uniform(e.len(), ERGODICITY_SIGMA)?;
        let p0 = vec![1.0 / e.len() as f64; e.len()];
        let mc = MonteCarlo { reps: 500, tau: 0.01, seed: ERGODICITY_SEED };
        let r = ergodicity_experiment(&e, &p, &sig, &p0, &mc, 20.0, 10)?;
        Ok(Outcome {
            passed: r.max_z <= 3.0 && r.long_time_deviation <= 1e-6 && r.support_holds,
            value: r.max_z,
            detail: format!(
                "max z {:.2}, max |deviation| {:.2e}, e^(Tt) p0 vs e0 at t = {:.0}: {:.1e}, support {}",
                r.max_z, r.max_abs_deviation, r.long_time, r.long_time_deviation, r.support_holds
            ),
        })
    })
}

/// Four levels, unit variance, `T = 2`, starting in the top level.
pub struct ConcentrationInstance {
    pub energies: Vec<f64>,
    pub params: FilterParams,
    pub sigma: RandomCouplingSpec,
    pub p0: Vec<f64>,
    pub total_time: f64,
}

pub fn concentration_instance() -> Result<ConcentrationInstance> {
    Ok(ConcentrationInstance {
        energies: vec![0.0, 1.0, 1.7, 2.5],
        params: FilterParams::default_params(2.5, 1.0)?.with_clamp(true),
        sigma: RandomCouplingSpec::uniform(4, 1.0)?,
        p0: vec![0.0, 0.0, 0.0, 1.0],
        total_time: 2.0,
    })
}

pub fn concentration_slope() -> CheckResult {
    check("concentration_slope", "slope in [0.4, 0.7]", || {
        let c = concentration_instance()?;
        let taus = [0.1, 0.05, 0.025, 0.0125];
        let r = concentration_experiment(&c.energies, &c.params, &c.sigma, &c.p0, &taus, c.total_time, 200, 7)?;
        let monotone = r.mean_deviation.windows(2).all(|w| w[1] < w[0]);
        Ok(Outcome {
            passed: (0.4..=0.7).contains(&r.slope) && monotone,
            value: r.slope,
            detail: format!("slope {:.3}, mean deviations {}", r.slope, fmt_list(&r.mean_deviation)),
        })
    })
}

/// Standard error with 25 and with 400 repetitions: the ratio should be 4.
pub fn concentration_clt() -> CheckResult {
    check("concentration_clt", "SE ratio within 30% of 4", || {
        let c = concentration_instance()?;
        let taus = [0.05, 0.025];
        let small = concentration_experiment(&c.energies, &c.params, &c.sigma, &c.p0, &taus, c.total_time, 25, 21)?;
        let large = concentration_experiment(&c.energies, &c.params, &c.sigma, &c.p0, &taus, c.total_time, 400, 22)?;
        let ratio = small.se_deviation[0] / large.se_deviation[0];
        Ok(Outcome {
            passed: (ratio / 4.0 - 1.0).abs() <= 0.3,
            value: ratio,
            detail: format!("SE {:.3e} (25 reps) / {:.3e} (400 reps) = {ratio:.2}", small.se_deviation[0], large.se_deviation[0]),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_parse() {
        assert_eq!("fast".parse::<Level>().unwrap(), Level::Fast);
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert_eq!("quick".parse::<Level>().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn mutation_breaks_quadrature_check() {
        assert!(quadrature_error(false).passed);
        let m = quadrature_error(true);
        assert!(!m.passed, "{}", m.line());
    }

    #[test]
    fn errors_become_failures() {
        let c = check("x", "b", || Err(Error::NonFinite));
        assert!(!c.passed && c.value.is_nan() && c.detail.contains("non-finite"));
    }
}
