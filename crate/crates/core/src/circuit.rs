//! The one-ancilla circuit: second-order Trotterized `W`, the resulting
//! channel on density matrices or state-vector trajectories, and cost
//! accounting.
//!
//! `W` is built in the eigenbasis of the coupling `A`, where every
//! controlled factor `exp(-i theta sigma_l x A)` is a direct sum of 2x2
//! rotations. Only the first block column of `W^r` is ever needed, which
//! gives the Kraus pair `B_0 = <0|W^r|0>`, `B_1 = <1|W^r|0>`.

use faer::{Col, Mat};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::filter::{quadrature_grid, FilterParams};
use crate::linalg::{
    expm, hermitian_eig, hermitian_part, identity, kron, scale, trace, zeros, ComplexMatrix, ComplexVector,
    DensityMatrix, HermitianOperator, SpectralDecomposition, C64, I, ZERO,
};
use crate::models::Problem;
use crate::stats::mean_and_se;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Continuous,
    Discrete,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Density,
    #[default]
    Trajectory,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `|psi_{N-1}>`, orthogonal to the ground state.
    #[default]
    HighestExcited,
    Ground,
    MaximallyMixed,
}

fn default_segments() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_reps() -> usize {
    100
}
fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub tau: f64,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_true")]
    pub include_coherent: bool,
    pub mode: Mode,
    pub total_time: f64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub initial_state: InitialState,
}

impl ChannelConfig {
    pub fn new(mode: Mode, tau: f64, total_time: f64) -> Self {
        Self {
            tau,
            segments: 1,
            include_coherent: true,
            mode,
            total_time,
            backend: Backend::Trajectory,
            reps: 100,
            seed: 0,
            record_stride: 1,
            initial_state: InitialState::HighestExcited,
        }
    }

    /// Number of steps `M_t = T / tau`; refuses non-integer ratios.
    pub fn steps(&self) -> Result<usize> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.total_time >= 0.0 && self.total_time.is_finite()) {
            return Err(Error::Config(format!("total_time must be nonnegative, got {}", self.total_time)));
        }
        let x = self.total_time / self.tau;
        let m = x.round();
        if (x - m).abs() > 1e-9 * x.max(1.0) {
            return Err(Error::Config(format!(
                "total_time / tau = {x} is not an integer step count"
            )));
        }
        Ok(m as usize)
    }

    pub fn validate(&self) -> Result<usize> {
        let steps = self.steps()?;
        if self.segments == 0 {
            return Err(Error::Config("segments must be at least 1".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        if self.mode == Mode::Continuous && self.segments != 1 {
            log::warn!("continuous mode with {} segments per step", self.segments);
        }
        Ok(steps)
    }

    /// Argument of each `W` segment: `W(sqrt(tau)/r)` has `tau_eff = tau / r^2`.
    pub fn segment_tau(&self) -> f64 {
        self.tau / (self.segments * self.segments) as f64
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostLedger {
    pub hamiltonian_time: f64,
    pub controlled_a_count: u64,
}

impl CostLedger {
    /// Cost of one `W` segment: the `e^{+-iH tau_s}` factors left after the
    /// middle pair cancels, and one controlled-A gate per `A~_l` factor.
    pub fn per_segment(p: &FilterParams) -> Self {
        let m = p.m_s() as u64;
        Self { hamiltonian_time: 4.0 * m as f64 * p.tau_s(), controlled_a_count: 2 * (2 * m + 1) }
    }

    pub fn per_step(p: &FilterParams, cfg: &ChannelConfig) -> Self {
        let seg = Self::per_segment(p);
        let r = cfg.segments as u64;
        let coherent = if cfg.include_coherent { cfg.tau } else { 0.0 };
        Self {
            hamiltonian_time: r as f64 * seg.hamiltonian_time + coherent,
            controlled_a_count: r * seg.controlled_a_count,
        }
    }

    pub fn times(&self, steps: usize) -> Self {
        Self { hamiltonian_time: self.hamiltonian_time * steps as f64, controlled_a_count: self.controlled_a_count * steps as u64 }
    }

    pub fn add(&mut self, other: &CostLedger) {
        self.hamiltonian_time += other.hamiltonian_time;
        self.controlled_a_count += other.controlled_a_count;
    }
}

/// `(I x U) X` for a block matrix `X` with `2 x 2` blocks of size `n`.
fn left_mul_system(u: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let n = u.nrows();
    let top = u * x.subrows(0, n);
    let bottom = u * x.subrows(n, n);
    let mut out = zeros(x.nrows(), x.ncols());
    out.subrows_mut(0, n).copy_from(&top);
    out.subrows_mut(n, n).copy_from(&bottom);
    out
}

/// `A~_l X` in the coupling eigenbasis: a 2x2 rotation on each pair of rows
/// `(k, n + k)` with angle `theta mu_k |c|` and phase `arg c`.
fn left_mul_controlled(mu: &[f64], theta: f64, c: C64, x: &mut ComplexMatrix) {
    let n = mu.len();
    let (modulus, phase) = (c.norm(), c.arg());
    let up = C64::from_polar(1.0, -phase);
    let down = C64::from_polar(1.0, phase);
    for (k, &m) in mu.iter().enumerate() {
        let ang = theta * m * modulus;
        let (cs, sn) = (ang.cos(), ang.sin());
        let off_up = -I * sn * up;
        let off_down = -I * sn * down;
        for j in 0..x.ncols() {
            let (a, b) = (x[(k, j)], x[(n + k, j)]);
            x[(k, j)] = a * cs + off_up * b;
            x[(n + k, j)] = off_down * a + b * cs;
        }
    }
}

/// Applies `W` to `x` (2N rows), everything in the coupling eigenbasis.
struct WFactors {
    mu: Vec<f64>,
    theta: f64,
    coeffs: Vec<C64>,
    u_plus: ComplexMatrix,
    u_minus: ComplexMatrix,
}

impl WFactors {
    fn new(spec: &SpectralDecomposition, a_spec: &SpectralDecomposition, p: &FilterParams, tau_eff: f64) -> Self {
        let v = a_spec.eigenvectors();
        let u_plus_comp = spec.evolution_unitary(-p.tau_s());
        let u_plus = v.adjoint() * &u_plus_comp * v;
        let u_minus = u_plus.adjoint().to_owned();
        let grid = quadrature_grid(p);
        Self {
            mu: a_spec.eigenvalues().to_vec(),
            theta: tau_eff.sqrt() / 2.0,
            coeffs: grid.weighted_kernel(p),
            u_plus,
            u_minus,
        }
    }

    /// `W X` with `W = (A~_{-M} U+ ... U+ A~_M)(A~_M U- ... U- A~_{-M})`.
    fn apply(&self, mut x: ComplexMatrix) -> ComplexMatrix {
        let last = self.coeffs.len() - 1;
        for (l, &c) in self.coeffs.iter().enumerate() {
            if l > 0 {
                x = left_mul_system(&self.u_minus, &x);
            }
            left_mul_controlled(&self.mu, self.theta, c, &mut x);
        }
        for (l, &c) in self.coeffs.iter().enumerate().rev() {
            if l < last {
                x = left_mul_system(&self.u_plus, &x);
            }
            left_mul_controlled(&self.mu, self.theta, c, &mut x);
        }
        x
    }
}

fn block_diag_basis(v: &ComplexMatrix) -> ComplexMatrix {
    kron(&identity(2), v)
}

/// The `2N x 2N` unitary `W(sqrt(tau_eff))` in the computational basis.
pub fn build_w(spec: &SpectralDecomposition, a: &HermitianOperator, p: &FilterParams, tau_eff: f64) -> Result<ComplexMatrix> {
    check_inputs(spec, a, tau_eff)?;
    let a_spec = hermitian_eig(a)?;
    let n = spec.dim();
    let w_a = WFactors::new(spec, &a_spec, p, tau_eff).apply(identity(2 * n));
    let big = block_diag_basis(a_spec.eigenvectors());
    Ok(&big * w_a * big.adjoint())
}

fn check_inputs(spec: &SpectralDecomposition, a: &HermitianOperator, tau_eff: f64) -> Result<()> {
    if spec.dim() != a.dim() {
        return Err(Error::Dimension("spectrum and coupling dimensions differ".into()));
    }
    if !(tau_eff >= 0.0 && tau_eff.is_finite()) {
        return Err(Error::InvalidParameter(format!("segment step must be nonnegative, got {tau_eff}")));
    }
    Ok(())
}

/// The uncancelled product of Heisenberg-frame factors
/// `prod_l exp(-i theta sigma_l x A(s_l))` forward then backward, with
/// `A(s) = e^{iHs} A e^{-iHs}`, each factor a dense matrix exponential.
pub fn naive_trotter_product(spec: &SpectralDecomposition, a: &HermitianOperator, p: &FilterParams, tau_eff: f64) -> Result<ComplexMatrix> {
    check_inputs(spec, a, tau_eff)?;
    let n = spec.dim();
    let grid = quadrature_grid(p);
    let theta = tau_eff.sqrt() / 2.0;
    let factors: Vec<ComplexMatrix> = grid
        .nodes
        .iter()
        .zip(grid.weighted_kernel(p))
        .map(|(&s, c)| {
            let u = spec.evolution_unitary(-s);
            let a_s = &u * a.matrix() * u.adjoint();
            let sigma = Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => c.conj(),
                (1, 0) => c,
                _ => ZERO,
            });
            expm(&scale(&kron(&sigma, &a_s), -I * theta))
        })
        .collect::<Result<_>>()?;
    let mut w = identity(2 * n);
    for f in factors.iter() {
        w = w * f;
    }
    for f in factors.iter().rev() {
        w = w * f;
    }
    Ok(w)
}

/// `e^{iH M_s tau_s}`, the frame rotation relating `W` to the naive product:
/// `W = F naive F^dag` (lifted to the joint register).
pub fn frame_unitary(spec: &SpectralDecomposition, p: &FilterParams) -> ComplexMatrix {
    spec.evolution_unitary(-p.grid_radius())
}

/// One step of the scheme as a Kraus pair, with the coherent evolution
/// folded in: `G_k = e^{-iH tau} <k|W^r|0>`.
#[derive(Clone, Debug)]
pub struct AncillaChannel {
    kraus: [ComplexMatrix; 2],
    per_step: CostLedger,
}

impl AncillaChannel {
    pub fn new(problem: &Problem, p: &FilterParams, cfg: &ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        let spec = &problem.spectrum;
        let a_spec = hermitian_eig(&problem.coupling)?;
        let n = spec.dim();
        let factors = WFactors::new(spec, &a_spec, p, cfg.segment_tau());
        // first block column of W^r, coupling eigenbasis
        let mut col = zeros(2 * n, n);
        col.subrows_mut(0, n).copy_from(&identity(n));
        for _ in 0..cfg.segments {
            col = factors.apply(col);
        }
        let v = a_spec.eigenvectors();
        let mut b0 = v * col.subrows(0, n) * v.adjoint();
        let mut b1 = v * col.subrows(n, n) * v.adjoint();
        if cfg.include_coherent {
            let u = spec.evolution_unitary(cfg.tau);
            b0 = &u * b0;
            b1 = &u * b1;
        }
        Ok(Self { kraus: [b0, b1], per_step: CostLedger::per_step(p, cfg) })
    }

    /// Kraus pair from an explicit `W` (applied `segments` times) and an
    /// optional coherent unitary.
    pub fn from_w(w: &ComplexMatrix, segments: usize, coherent: Option<&ComplexMatrix>, per_step: CostLedger) -> Result<Self> {
        let d = w.nrows();
        if !d.is_multiple_of(2) || w.ncols() != d {
            return Err(Error::Dimension("W must be square with an ancilla qubit".into()));
        }
        let n = d / 2;
        let mut col = zeros(d, n);
        col.subrows_mut(0, n).copy_from(&identity(n));
        for _ in 0..segments {
            col = w * col;
        }
        let mut b0 = col.subrows(0, n).to_owned();
        let mut b1 = col.subrows(n, n).to_owned();
        if let Some(u) = coherent {
            b0 = u * b0;
            b1 = u * b1;
        }
        Ok(Self { kraus: [b0, b1], per_step })
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[ComplexMatrix; 2] {
        &self.kraus
    }

    pub fn per_step_cost(&self) -> CostLedger {
        self.per_step
    }

    /// `V^dag G_k V` for both Kraus operators.
    pub fn in_basis(&self, v: &ComplexMatrix) -> Self {
        let t = |g: &ComplexMatrix| v.adjoint() * g * v;
        Self { kraus: [t(&self.kraus[0]), t(&self.kraus[1])], per_step: self.per_step }
    }

    /// `sum_k G_k rho G_k^dag` without validation.
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let [g0, g1] = &self.kraus;
        let out = g0 * rho * g0.adjoint() + g1 * rho * g1.adjoint();
        hermitian_part(&out)
    }
}

/// Trace drift per density step that is reported as an error.
pub const CHANNEL_TRACE_TOL: f64 = 1e-8;

pub fn channel_step_density(rho: &DensityMatrix, channel: &AncillaChannel) -> Result<(DensityMatrix, CostLedger)> {
    if rho.dim() != channel.dim() {
        return Err(Error::Dimension("state and channel dimensions differ".into()));
    }
    let out = channel.apply_matrix(rho.matrix());
    let drift = (trace(&out).re - 1.0).abs();
    if drift > CHANNEL_TRACE_TOL {
        return Err(Error::TraceDrift { drift });
    }
    Ok((DensityMatrix::new(out)?, channel.per_step))
}

/// Branch norms below this abort a trajectory.
pub const NORM_FLOOR: f64 = 1e-12;

/// Measure-and-discard step on a normalized state vector.
pub fn trajectory_step<R: Rng + ?Sized>(psi: &ComplexVector, channel: &AncillaChannel, rng: &mut R) -> Result<(ComplexVector, u8, CostLedger)> {
    if psi.nrows() != channel.dim() {
        return Err(Error::Dimension("state and channel dimensions differ".into()));
    }
    let norm = psi.norm_l2();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("state vector norm {norm} is not 1")));
    }
    let (next, outcome) = trajectory_branch(psi, channel, rng.random::<f64>())?;
    Ok((next, outcome, channel.per_step))
}

/// Picks outcome 0 when `u < p_0`.
fn trajectory_branch(psi: &ComplexVector, channel: &AncillaChannel, u: f64) -> Result<(ComplexVector, u8)> {
    let phi0: Col<C64> = &channel.kraus[0] * psi;
    let p0 = phi0.squared_norm_l2();
    let (phi, outcome) = if u < p0 { (phi0, 0u8) } else { (&channel.kraus[1] * psi, 1u8) };
    let norm = phi.norm_l2();
    if !(norm > NORM_FLOOR) {
        return Err(Error::NormCollapse { norm });
    }
    Ok((scale_col(&phi, 1.0 / norm), outcome))
}

fn scale_col(v: &ComplexVector, s: f64) -> ComplexVector {
    Col::from_fn(v.nrows(), |i| v[i] * s)
}

/// One recorded point of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub step: usize,
    pub time: f64,
    pub h_time: f64,
    pub a_gates: u64,
    pub energy_mean: f64,
    pub energy_se: f64,
    pub overlap_mean: f64,
    pub overlap_se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationRecord {
    pub rows: Vec<RecordRow>,
    pub ground_energy: f64,
    pub first_excited_energy: f64,
    pub highest_energy: f64,
    pub per_step: CostLedger,
    pub steps: usize,
    pub reps: usize,
}

impl SimulationRecord {
    pub fn last(&self) -> &RecordRow {
        self.rows.last().expect("a record always holds the initial point")
    }

    pub fn gap(&self) -> f64 {
        self.first_excited_energy - self.ground_energy
    }

    /// First recorded row whose mean overlap reaches `level`.
    pub fn first_reaching(&self, level: f64) -> Option<&RecordRow> {
        self.rows.iter().find(|r| r.overlap_mean >= level)
    }
}

fn recorded_steps(steps: usize, stride: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=steps).step_by(stride).collect();
    if *v.last().unwrap() != steps {
        v.push(steps);
    }
    v
}

/// Energy and ground-space overlap of populations in the energy basis; the
/// first `ground` levels span the ground space.
fn observables(pops: impl Iterator<Item = f64>, energies: &[f64], ground: usize) -> (f64, f64) {
    let mut e = 0.0;
    let mut o = 0.0;
    for (k, p) in pops.enumerate() {
        e += p * energies[k];
        if k < ground {
            o += p;
        }
    }
    (e, o)
}

fn trajectory_stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs the scheme from the configured initial state and records energy and
/// ground overlap. Deterministic in `(seed, reps)` for any worker count.
pub fn run_simulation(problem: &Problem, cfg: &ChannelConfig, p: &FilterParams) -> Result<SimulationRecord> {
    let steps = cfg.validate()?;
    let spec = &problem.spectrum;
    let n = spec.dim();
    let energies = spec.eigenvalues();
    let ground = spec.ground_degeneracy();
    let channel = AncillaChannel::new(problem, p, cfg)?.in_basis(spec.eigenvectors());
    let per_step = channel.per_step;
    let record_at = recorded_steps(steps, cfg.record_stride);

    let samples: Vec<Vec<(f64, f64)>> = match cfg.backend {
        Backend::Density => {
            let mut rho = match cfg.initial_state {
                InitialState::HighestExcited => basis_projector(n, n - 1),
                InitialState::Ground => basis_projector(n, 0),
                InitialState::MaximallyMixed => scale(&identity(n), C64::new(1.0 / n as f64, 0.0)),
            };
            let mut out = Vec::with_capacity(record_at.len());
            let mut next = record_at.iter().peekable();
            for m in 0..=steps {
                if next.peek() == Some(&&m) {
                    next.next();
                    out.push(observables((0..n).map(|k| rho[(k, k)].re), energies, ground));
                }
                if m < steps {
                    rho = channel.apply_matrix(&rho);
                    let tr = trace(&rho).re;
                    if (tr - 1.0).abs() > CHANNEL_TRACE_TOL {
                        return Err(Error::TraceDrift { drift: (tr - 1.0).abs() });
                    }
                }
            }
            vec![out]
        }
        Backend::Trajectory => (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = trajectory_stream(cfg.seed, rep);
                let start = match cfg.initial_state {
                    InitialState::HighestExcited => n - 1,
                    InitialState::Ground => 0,
                    InitialState::MaximallyMixed => rng.random_range(0..n),
                };
                let mut psi: ComplexVector = Col::from_fn(n, |k| if k == start { C64::new(1.0, 0.0) } else { ZERO });
                let mut out = Vec::with_capacity(record_at.len());
                let mut next = record_at.iter().peekable();
                for m in 0..=steps {
                    if next.peek() == Some(&&m) {
                        next.next();
                        out.push(observables((0..n).map(|k| psi[k].norm_sqr()), energies, ground));
                    }
                    if m < steps {
                        psi = trajectory_branch(&psi, &channel, rng.random::<f64>())?.0;
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let rows = record_at
        .iter()
        .enumerate()
        .map(|(idx, &m)| {
            let es: Vec<f64> = samples.iter().map(|s| s[idx].0).collect();
            let os: Vec<f64> = samples.iter().map(|s| s[idx].1).collect();
            let (energy_mean, energy_se) = mean_and_se(&es);
            let (overlap_mean, overlap_se) = mean_and_se(&os);
            let cost = per_step.times(m);
            RecordRow {
                step: m,
                time: m as f64 * cfg.tau,
                h_time: cost.hamiltonian_time,
                a_gates: cost.controlled_a_count,
                energy_mean,
                energy_se,
                overlap_mean,
                overlap_se,
            }
        })
        .collect();
    Ok(SimulationRecord {
        rows,
        ground_energy: energies[0],
        first_excited_energy: energies[1.min(n - 1)],
        highest_energy: energies[n - 1],
        per_step,
        steps,
        reps: samples.len(),
    })
}

fn basis_projector(n: usize, k: usize) -> ComplexMatrix {
    Mat::from_fn(n, n, |i, j| if i == k && j == k { C64::new(1.0, 0.0) } else { ZERO })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump::{dilate_matrix, quadrature_jump};
    use crate::linalg::{conjugate, max_abs_diff, trace_norm};
    use crate::models::ModelSpec;
    use crate::reference::exact_dilated_step;

    fn setup(l: usize) -> (Problem, FilterParams) {
        let pr = Problem::from_model(&ModelSpec::tfim(l, 1.2)).unwrap();
        let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap()).unwrap();
        (pr, p)
    }

    fn random_state(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &g * g.adjoint();
        let tr = trace(&m).re;
        DensityMatrix::new(scale(&m, C64::new(1.0 / tr, 0.0))).unwrap()
    }

    #[test]
    fn controlled_factor_matches_dense_exponential() {
        let mu = [0.7, -1.3, 0.2];
        let c = C64::new(0.3, -0.8);
        let theta = 0.45;
        let a = HermitianOperator::from_real_diagonal(&mu);
        let sigma = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c.conj(),
            (1, 0) => c,
            _ => ZERO,
        });
        let want = expm(&scale(&kron(&sigma, a.matrix()), -I * theta)).unwrap();
        let mut got = identity(6);
        left_mul_controlled(&mu, theta, c, &mut got);
        assert!(max_abs_diff(&got, &want) < 1e-14);
    }

    #[test]
    fn w_is_unitary_and_matches_the_cancelled_naive_product() {
        let (pr, p) = setup(4);
        let tau = 0.3;
        let w = build_w(&pr.spectrum, &pr.coupling, &p, tau).unwrap();
        assert!(max_abs_diff(&(w.adjoint() * &w), &identity(32)) < 1e-10);
        let naive = naive_trotter_product(&pr.spectrum, &pr.coupling, &p, tau).unwrap();
        let f = kron(&identity(2), &frame_unitary(&pr.spectrum, &p));
        assert!(max_abs_diff(&w, &conjugate(&f, &naive)) < 1e-10);
    }

    #[test]
    fn zero_step_is_identity() {
        let (pr, p) = setup(2);
        let w = build_w(&pr.spectrum, &pr.coupling, &p, 0.0).unwrap();
        assert!(max_abs_diff(&w, &identity(8)) < 1e-12);
        let mut cfg = ChannelConfig::new(Mode::Continuous, 0.5, 1.0);
        cfg.include_coherent = false;
        let ch = AncillaChannel::from_w(&w, 1, None, CostLedger::per_step(&p, &cfg)).unwrap();
        let rho = random_state(4, 1);
        let (out, _) = channel_step_density(&rho, &ch).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn zero_coupling_leaves_only_frame_free_identity() {
        let (pr, p) = setup(2);
        let a = HermitianOperator::new(zeros(4, 4)).unwrap();
        let w = build_w(&pr.spectrum, &a, &p, 0.2).unwrap();
        assert!(max_abs_diff(&w, &identity(8)) < 1e-12);
    }

    #[test]
    fn channel_built_directly_matches_explicit_w() {
        let (pr, p) = setup(2);
        let mut cfg = ChannelConfig::new(Mode::Discrete, 1.0, 4.0);
        cfg.segments = 3;
        let ch = AncillaChannel::new(&pr, &p, &cfg).unwrap();
        let w = build_w(&pr.spectrum, &pr.coupling, &p, cfg.segment_tau()).unwrap();
        let u = pr.spectrum.evolution_unitary(cfg.tau);
        let ch2 = AncillaChannel::from_w(&w, 3, Some(&u), ch.per_step_cost()).unwrap();
        for k in 0..2 {
            assert!(max_abs_diff(&ch.kraus()[k], &ch2.kraus()[k]) < 1e-12);
        }
        let sum = ch.kraus()[0].adjoint() * &ch.kraus()[0] + ch.kraus()[1].adjoint() * &ch.kraus()[1];
        assert!(max_abs_diff(&sum, &identity(4)) < 1e-10);
    }

    #[test]
    fn channel_trotter_error_is_second_order() {
        let (pr, p) = setup(2);
        let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
        let frame = frame_unitary(&pr.spectrum, &p);
        let kt = dilate_matrix(&conjugate(&frame, ks.matrix()));
        let rho = random_state(4, 2);
        let taus = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
        let errs: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                let mut cfg = ChannelConfig::new(Mode::Continuous, tau, tau);
                cfg.include_coherent = false;
                let ch = AncillaChannel::new(&pr, &p, &cfg).unwrap();
                let (a, _) = channel_step_density(&rho, &ch).unwrap();
                let b = exact_dilated_step(&kt, &rho, tau).unwrap();
                trace_norm(&(a.matrix() - b.matrix())).unwrap()
            })
            .collect();
        let slope = crate::stats::loglog_slope(&taus, &errs);
        assert!((slope - 2.0).abs() <= 0.25, "slope {slope} errs {errs:?}");
    }

    #[test]
    fn ledger_arithmetic() {
        let (pr, p) = setup(4);
        let cfg = ChannelConfig::new(Mode::Continuous, 0.1, 80.0);
        assert_eq!(cfg.steps().unwrap(), 800);
        let per = CostLedger::per_step(&p, &cfg);
        assert_eq!(per.controlled_a_count, 2 * (2 * p.m_s() as u64 + 1));
        assert!((per.hamiltonian_time - (4.0 * p.m_s() as f64 * p.tau_s() + 0.1)).abs() < 1e-12);
        let mut d = ChannelConfig::new(Mode::Discrete, 1.0, 80.0);
        d.segments = 2;
        let per_d = CostLedger::per_step(&p, &d);
        assert_eq!(per_d.controlled_a_count, 2 * per.controlled_a_count);
        let _ = pr;
    }

    #[test]
    fn step_count_must_be_integral() {
        assert!(ChannelConfig::new(Mode::Continuous, 0.3, 1.0).steps().is_err());
        assert_eq!(ChannelConfig::new(Mode::Continuous, 0.1, 0.3).steps().unwrap(), 3);
    }

    #[test]
    fn trajectory_identity_channel() {
        let (pr, p) = setup(2);
        let w = identity(8);
        let u = pr.spectrum.evolution_unitary(0.4);
        let cfg = ChannelConfig::new(Mode::Continuous, 0.4, 0.4);
        let ch = AncillaChannel::from_w(&w, 1, Some(&u), CostLedger::per_step(&p, &cfg)).unwrap();
        let psi = pr.spectrum.state(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let (next, outcome, _) = trajectory_step(&psi, &ch, &mut rng).unwrap();
            assert_eq!(outcome, 0);
            assert!((&next - &u * &psi).norm_l2() < 1e-13);
        }
        let bad = scale_col(&psi, 2.0);
        assert!(trajectory_step(&bad, &ch, &mut rng).is_err());
    }

    #[test]
    fn ground_state_rarely_triggers_the_ancilla() {
        let (pr, p) = setup(4);
        let cfg = ChannelConfig::new(Mode::Discrete, 1.0, 1.0);
        let ch = AncillaChannel::new(&pr, &p, &cfg).unwrap();
        let psi = pr.spectrum.ground_state();
        let p1 = (&ch.kraus()[1] * &psi).squared_norm_l2();
        assert!(p1 <= 1e-2, "{p1}");
    }

    #[test]
    fn trajectories_reproduce_density_backend() {
        let (pr, p) = setup(2);
        let mut cfg = ChannelConfig::new(Mode::Continuous, 0.5, 2.0);
        cfg.initial_state = InitialState::HighestExcited;
        cfg.backend = Backend::Density;
        let dens = run_simulation(&pr, &cfg, &p).unwrap();
        cfg.backend = Backend::Trajectory;
        cfg.reps = 2000;
        cfg.seed = 11;
        let traj = run_simulation(&pr, &cfg, &p).unwrap();
        for (d, t) in dens.rows.iter().zip(&traj.rows).skip(1) {
            assert!((d.energy_mean - t.energy_mean).abs() <= 3.0 * t.energy_se.max(1e-12), "{d:?} {t:?}");
            assert!((d.overlap_mean - t.overlap_mean).abs() <= 3.0 * t.overlap_se.max(1e-12), "{d:?} {t:?}");
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let (pr, p) = setup(2);
        let mut cfg = ChannelConfig::new(Mode::Discrete, 1.0, 5.0);
        cfg.reps = 7;
        cfg.seed = 3;
        let a = run_simulation(&pr, &cfg, &p).unwrap();
        let b = run_simulation(&pr, &cfg, &p).unwrap();
        assert_eq!(a.rows, b.rows);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| run_simulation(&pr, &cfg, &p).unwrap());
        assert_eq!(a.rows, c.rows);
    }

    #[test]
    fn recorded_steps_include_final() {
        assert_eq!(recorded_steps(5, 2), vec![0, 2, 4, 5]);
        assert_eq!(recorded_steps(4, 2), vec![0, 2, 4]);
        assert_eq!(recorded_steps(0, 3), vec![0]);
    }
}
