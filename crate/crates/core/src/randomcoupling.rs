//! Population dynamics under random couplings.
//!
//! With `A` drawn afresh (zero mean, `E|A_ij|^2 = sigma_ij`, energy basis)
//! and a diagonal initial state, the expected populations obey
//! `dp/dt = T p` with `T_ji = f_hat(lambda_j - lambda_i)^2 sigma_ji` for
//! `j != i` and columns summing to zero. The experiments here compare that
//! expectation against Monte Carlo runs that resample `A` every step.

use faer::Mat;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::filter::{f_hat, FilterParams};
use crate::linalg::{expm, frobenius_norm, trace, zeros, ComplexMatrix, HermitianOperator, C64};
use crate::reference::LindbladSystem;
use crate::stats::{loglog_slope, mean_and_se};
use crate::{Error, Result};

/// Variance profile `sigma_ij = E|A_ij|^2` in the energy basis.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomCouplingSpec {
    sigma: Vec<f64>,
    dim: usize,
}

impl RandomCouplingSpec {
    /// Row-major `n x n` symmetric profile with positive entries.
    pub fn new(dim: usize, sigma: Vec<f64>) -> Result<Self> {
        if dim == 0 || sigma.len() != dim * dim {
            return Err(Error::Dimension(format!("variance profile needs {} entries, got {}", dim * dim, sigma.len())));
        }
        for i in 0..dim {
            for j in 0..dim {
                let s = sigma[i * dim + j];
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidParameter(format!("sigma[{i}][{j}] = {s} must be positive")));
                }
                if (s - sigma[j * dim + i]).abs() > 1e-14 * s.abs().max(1.0) {
                    return Err(Error::InvalidParameter("variance profile must be symmetric".into()));
                }
            }
        }
        Ok(Self { sigma, dim })
    }

    pub fn uniform(dim: usize, s: f64) -> Result<Self> {
        Self::new(dim, vec![s; dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.dim + j]
    }
}

/// One draw of `A` in the energy basis: complex Gaussian off the diagonal,
/// real Gaussian on it.
pub fn sample_coupling<R: Rng + ?Sized>(spec: &RandomCouplingSpec, rng: &mut R) -> HermitianOperator {
    let n = spec.dim;
    let mut a = zeros(n, n);
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        a[(i, i)] = C64::new(d * spec.sigma(i, i).sqrt(), 0.0);
        for j in i + 1..n {
            let sd = (spec.sigma(i, j) / 2.0).sqrt();
            let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            let z = C64::new(re * sd, im * sd);
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(a).expect("sampled coupling is Hermitian by construction")
}

/// `f_hat(lambda_i - lambda_j) > 0` for every `i < j`: every downward
/// transition is allowed.
pub fn filter_support_holds(energies: &[f64], p: &FilterParams) -> bool {
    (0..energies.len()).all(|j| (0..j).all(|i| f_hat(energies[i] - energies[j], p) > 0.0))
}

#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    rates: Mat<f64>,
    energies: Vec<f64>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `T_{j,i}`: rate from level `i` into level `j` for `j != i`.
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.rates[(j, i)]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Smallest total outflow rate among excited levels.
    pub fn min_rate(&self) -> f64 {
        (1..self.dim()).map(|i| -self.rates[(i, i)]).fold(f64::INFINITY, f64::min)
    }

    pub fn as_complex(&self) -> ComplexMatrix {
        Mat::from_fn(self.dim(), self.dim(), |i, j| C64::new(self.rates[(i, j)], 0.0))
    }
}

/// Requires the clamped filter so that upward rates vanish exactly.
pub fn transition_matrix(energies: &[f64], p: &FilterParams, sigma: &RandomCouplingSpec) -> Result<TransitionMatrix> {
    let n = energies.len();
    if n != sigma.dim() {
        return Err(Error::Dimension("spectrum and variance profile sizes differ".into()));
    }
    if !p.clamp_nonnegative() {
        return Err(Error::InvalidParameter("the transition matrix needs the clamped filter".into()));
    }
    if energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("energies must be ascending".into()));
    }
    let mut rates = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let mut out = 0.0;
        for j in 0..n {
            if j != i {
                let f = f_hat(energies[j] - energies[i], p);
                let r = f * f * sigma.sigma(j, i);
                rates[(j, i)] = r;
                out += r;
            }
        }
        rates[(i, i)] = -out;
    }
    Ok(TransitionMatrix { rates, energies: energies.to_vec() })
}

fn check_probability(p0: &[f64], n: usize) -> Result<()> {
    if p0.len() != n {
        return Err(Error::Dimension(format!("population vector has {} entries, expected {n}", p0.len())));
    }
    if p0.iter().any(|&x| !(x >= 0.0)) || (p0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("initial populations must be a probability vector".into()));
    }
    Ok(())
}

fn propagator(t: &TransitionMatrix, time: f64) -> Result<ComplexMatrix> {
    expm(&Mat::from_fn(t.dim(), t.dim(), |i, j| C64::new(t.rates[(i, j)] * time, 0.0)))
}

fn apply_real(e: &ComplexMatrix, p: &[f64]) -> Vec<f64> {
    (0..p.len()).map(|i| (0..p.len()).map(|j| e[(i, j)].re * p[j]).sum()).collect()
}

/// `e^{T t} p0` by dense matrix exponential.
pub fn evolve_populations(t: &TransitionMatrix, p0: &[f64], time: f64) -> Result<Vec<f64>> {
    check_probability(p0, t.dim())?;
    if !(time >= 0.0 && time.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {time}")));
    }
    Ok(apply_real(&propagator(t, time)?, p0))
}

/// Equally spaced levels `0, d, 2d, ...`.
pub fn equispaced_spectrum(n: usize, spacing: f64) -> Vec<f64> {
    (0..n).map(|k| k as f64 * spacing).collect()
}

/// `clusters` groups of levels, group `c` centered at `c * separation` with
/// intra-cluster spacing `spread`.
pub fn clustered_spectrum(n: usize, clusters: usize, separation: f64, spread: f64) -> Vec<f64> {
    let per = n.div_ceil(clusters.max(1));
    let mut v: Vec<f64> = (0..n).map(|k| (k / per) as f64 * separation + (k % per) as f64 * spread).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Ground level at zero, the rest uniform in `(gap, gap + width)`, sorted.
pub fn random_spectrum(n: usize, gap: f64, width: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = std::iter::once(0.0).chain((1..n).map(|_| gap + width * rng.random::<f64>())).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Monte Carlo settings shared by the ergodicity and concentration runs.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarlo {
    pub reps: usize,
    pub tau: f64,
    pub seed: u64,
}

fn rep_stream(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Evolves one realization: every step of length `tau` draws a new `A`,
/// forms `K = F o A` and takes one RK4 step of the full Lindbladian.
/// Calls `record(step, rho)` after each step.
fn random_coupling_run<F: FnMut(usize, &ComplexMatrix)>(
    energies: &[f64],
    filter: &Mat<f64>,
    sigma: &RandomCouplingSpec,
    p0: &[f64],
    tau: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
    mut record: F,
) -> Result<()> {
    let n = energies.len();
    let h = HermitianOperator::from_real_diagonal(energies);
    let mut rho = Mat::from_fn(n, n, |i, j| if i == j { C64::new(p0[i], 0.0) } else { C64::new(0.0, 0.0) });
    for m in 1..=steps {
        let a = sample_coupling(sigma, rng);
        let k = Mat::from_fn(n, n, |i, j| a.matrix()[(i, j)] * filter[(i, j)]);
        let sys = LindbladSystem::from_matrices(&h, k, true)?;
        rho = sys.rk4_step(&rho, tau);
        let tr = trace(&rho).re;
        if !(tr.is_finite() && (tr - 1.0).abs() < 1e-6) {
            return Err(Error::TraceDrift { drift: (tr - 1.0).abs() });
        }
        rho = crate::linalg::scale(&rho, C64::new(1.0 / tr, 0.0));
        record(m, &rho);
    }
    Ok(())
}

fn filter_values(energies: &[f64], p: &FilterParams) -> Mat<f64> {
    let n = energies.len();
    Mat::from_fn(n, n, |i, j| f_hat(energies[i] - energies[j], p))
}

fn step_count(total: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && total > 0.0) {
        return Err(Error::InvalidParameter("tau and total time must be positive".into()));
    }
    let x = total / tau;
    let m = x.round();
    if (x - m).abs() > 1e-9 * x {
        return Err(Error::InvalidParameter(format!("total time / tau = {x} is not an integer")));
    }
    Ok(m as usize)
}

#[derive(Clone, Debug, Serialize)]
pub struct ErgodicityReport {
    pub times: Vec<f64>,
    /// Monte Carlo mean populations per checkpoint.
    pub mc_mean: Vec<Vec<f64>>,
    pub mc_se: Vec<Vec<f64>>,
    /// `e^{T t} p0` per checkpoint.
    pub expected: Vec<Vec<f64>>,
    /// Largest `|mean - expected| / max(se, 1e-12)`.
    pub max_z: f64,
    pub max_abs_deviation: f64,
    /// `max_i |(e^{T t_long} p0)_i - delta_{i0}|` at `t_long = 50 / min_rate`.
    pub long_time_deviation: f64,
    pub long_time: f64,
    pub support_holds: bool,
}

/// Monte Carlo populations with per-step resampled couplings against the
/// transition-matrix expectation, at `checkpoints` evenly spaced times.
pub fn ergodicity_experiment(
    energies: &[f64],
    p: &FilterParams,
    sigma: &RandomCouplingSpec,
    p0: &[f64],
    mc: &MonteCarlo,
    total_time: f64,
    checkpoints: usize,
) -> Result<ErgodicityReport> {
    let n = energies.len();
    check_probability(p0, n)?;
    let tm = transition_matrix(energies, p, sigma)?;
    let steps = step_count(total_time, mc.tau)?;
    if checkpoints == 0 || checkpoints > steps {
        return Err(Error::InvalidParameter("checkpoints must lie in 1..=steps".into()));
    }
    let marks: Vec<usize> = (1..=checkpoints).map(|c| c * steps / checkpoints).collect();
    let filter = filter_values(energies, p);
    let runs: Vec<Vec<Vec<f64>>> = (0..mc.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_stream(mc.seed, rep);
            let mut out = Vec::with_capacity(marks.len());
            random_coupling_run(energies, &filter, sigma, p0, mc.tau, steps, &mut rng, |m, rho| {
                if marks.contains(&m) {
                    out.push((0..n).map(|i| rho[(i, i)].re).collect());
                }
            })?;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut report = ErgodicityReport {
        times: marks.iter().map(|&m| m as f64 * mc.tau).collect(),
        mc_mean: vec![],
        mc_se: vec![],
        expected: vec![],
        max_z: 0.0,
        max_abs_deviation: 0.0,
        long_time_deviation: 0.0,
        long_time: 50.0 / tm.min_rate(),
        support_holds: filter_support_holds(energies, p),
    };
    for (c, &t) in report.times.iter().enumerate() {
        let want = evolve_populations(&tm, p0, t)?;
        let (mut means, mut ses) = (vec![], vec![]);
        for i in 0..n {
            let xs: Vec<f64> = runs.iter().map(|r| r[c][i]).collect();
            let (m, se) = mean_and_se(&xs);
            report.max_z = report.max_z.max((m - want[i]).abs() / se.max(1e-12));
            report.max_abs_deviation = report.max_abs_deviation.max((m - want[i]).abs());
            means.push(m);
            ses.push(se);
        }
        report.mc_mean.push(means);
        report.mc_se.push(ses);
        report.expected.push(want);
    }
    let long = evolve_populations(&tm, p0, report.long_time)?;
    report.long_time_deviation = long
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - if i == 0 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerReport {
    pub layer: usize,
    /// Levels above this index form the layer's tail.
    pub threshold: usize,
    /// Smallest total rate from a tail level into levels `0..=threshold`.
    pub min_rate_out: f64,
    pub violates_rate_floor: bool,
    pub target: f64,
    pub crossing_time: Option<f64>,
    pub tail_mass: Vec<f64>,
    pub monotone: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub times: Vec<f64>,
    pub layers: Vec<LayerReport>,
}

/// Tail masses `m_l(t) = sum_{i > R_{l+1}} p_i(t)` for decreasing thresholds
/// `R_1 > R_2 > ...`, the first time each drops below `1/2 - 1/(l+3)`, and
/// the out-rate condition `sum_{i <= R} f_hat^2 sigma >= floor` for every
/// tail level.
pub fn mixing_layers_experiment(
    energies: &[f64],
    p: &FilterParams,
    sigma: &RandomCouplingSpec,
    thresholds: &[usize],
    p0: &[f64],
    t_max: f64,
    samples: usize,
    rate_floor: f64,
) -> Result<MixingReport> {
    let n = energies.len();
    check_probability(p0, n)?;
    if thresholds.windows(2).any(|w| w[1] >= w[0]) || thresholds.iter().any(|&r| r + 1 >= n) {
        return Err(Error::InvalidParameter("thresholds must be strictly decreasing and below N - 1".into()));
    }
    if samples < 2 || !(t_max > 0.0) {
        return Err(Error::InvalidParameter("need at least two samples over a positive horizon".into()));
    }
    let tm = transition_matrix(energies, p, sigma)?;
    let dt = t_max / (samples - 1) as f64;
    let step = propagator(&tm, dt)?;
    let mut pops = vec![p0.to_vec()];
    for _ in 1..samples {
        let next = apply_real(&step, pops.last().unwrap());
        pops.push(next);
    }
    let times: Vec<f64> = (0..samples).map(|k| k as f64 * dt).collect();
    let layers = thresholds
        .iter()
        .enumerate()
        .map(|(l, &r)| {
            let tail_mass: Vec<f64> = pops.iter().map(|q| q[r + 1..].iter().sum()).collect();
            let min_rate_out = (r + 1..n)
                .map(|j| (0..=r).map(|i| tm.get(i, j)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let target = 0.5 - 1.0 / (l as f64 + 3.0);
            let crossing_time = tail_mass.iter().position(|&m| m <= target).map(|k| times[k]);
            let monotone = tail_mass.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            LayerReport {
                layer: l,
                threshold: r,
                min_rate_out,
                violates_rate_floor: min_rate_out < rate_floor,
                target,
                crossing_time,
                tail_mass,
                monotone,
            }
        })
        .collect();
    Ok(MixingReport { times, layers })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub taus: Vec<f64>,
    pub mean_deviation: Vec<f64>,
    pub se_deviation: Vec<f64>,
    pub slope: f64,
}

/// `E |rho_M - diag(e^{T T_f} p0)|_F` over single realizations, per `tau`,
/// and its log-log slope in `tau`.
pub fn concentration_experiment(
    energies: &[f64],
    p: &FilterParams,
    sigma: &RandomCouplingSpec,
    p0: &[f64],
    taus: &[f64],
    total_time: f64,
    reps: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let n = energies.len();
    check_probability(p0, n)?;
    if taus.len() < 2 {
        return Err(Error::InvalidParameter("need at least two step sizes".into()));
    }
    let tm = transition_matrix(energies, p, sigma)?;
    let target = evolve_populations(&tm, p0, total_time)?;
    let target_m = Mat::from_fn(n, n, |i, j| if i == j { C64::new(target[i], 0.0) } else { C64::new(0.0, 0.0) });
    let filter = filter_values(energies, p);
    let mut report = ConcentrationReport { taus: taus.to_vec(), mean_deviation: vec![], se_deviation: vec![], slope: f64::NAN };
    for (k, &tau) in taus.iter().enumerate() {
        let steps = step_count(total_time, tau)?;
        let devs: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = rep_stream(seed.wrapping_add(k as u64 * 0x9E37_79B9), rep);
                let mut last = zeros(n, n);
                random_coupling_run(energies, &filter, sigma, p0, tau, steps, &mut rng, |m, rho| {
                    if m == steps {
                        last = rho.clone();
                    }
                })?;
                Ok(frobenius_norm(&(&last - &target_m)))
            })
            .collect::<Result<_>>()?;
        let (m, se) = mean_and_se(&devs);
        report.mean_deviation.push(m);
        report.se_deviation.push(se);
    }
    report.slope = loglog_slope(&report.taus, &report.mean_deviation);
    Ok(report)
}
