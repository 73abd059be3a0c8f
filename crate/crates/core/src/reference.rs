//! Reference evolutions that the circuit is measured against.

use faer::Mat;

use crate::jump::{DilatedJump, JumpOperator};
use crate::linalg::{
    conjugate, expm, hermitian_eig, hermitian_part, identity, kron, partial_trace_ancilla, scale, trace,
    zeros, ComplexMatrix, DensityMatrix, HermitianOperator, C64, I,
};
use crate::{Error, Result};

/// Largest system dimension for which the dense superoperator is built.
pub const SUPEROPERATOR_MAX_DIM: usize = 16;

/// Trace drift per RK4 step that aborts integration.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct LindbladSystem {
    h: HermitianOperator,
    k: ComplexMatrix,
    kdk: ComplexMatrix,
    include_coherent: bool,
}

impl LindbladSystem {
    pub fn new(h: &HermitianOperator, k: &JumpOperator, include_coherent: bool) -> Result<Self> {
        Self::from_matrices(h, k.matrix().clone(), include_coherent)
    }

    pub fn from_matrices(h: &HermitianOperator, k: ComplexMatrix, include_coherent: bool) -> Result<Self> {
        if h.dim() != k.nrows() || k.nrows() != k.ncols() {
            return Err(Error::Dimension(format!("H is {0}x{0} but K is {1}x{2}", h.dim(), k.nrows(), k.ncols())));
        }
        let kdk = k.adjoint() * &k;
        Ok(Self { h: h.clone(), k, kdk, include_coherent })
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.h
    }

    pub fn jump(&self) -> &ComplexMatrix {
        &self.k
    }

    pub fn include_coherent(&self) -> bool {
        self.include_coherent
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let jump = &self.k * rho * self.k.adjoint();
        let left = &self.kdk * rho;
        let right = rho * &self.kdk;
        let n = self.dim();
        let mut out = Mat::from_fn(n, n, |i, j| jump[(i, j)] - 0.5 * (left[(i, j)] + right[(i, j)]));
        if self.include_coherent {
            let comm = self.h.matrix() * rho - rho * self.h.matrix();
            out = Mat::from_fn(n, n, |i, j| out[(i, j)] - I * comm[(i, j)]);
        }
        out
    }

    /// One classical RK4 step, re-Hermitized, without trace handling.
    pub fn rk4_step(&self, rho: &ComplexMatrix, dt: f64) -> ComplexMatrix {
        let h = C64::new(dt, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + scale(&k1, h * 0.5)));
        let k3 = self.apply(&(rho + scale(&k2, h * 0.5)));
        let k4 = self.apply(&(rho + scale(&k3, h)));
        let n = rho.nrows();
        let next = Mat::from_fn(n, n, |i, j| {
            rho[(i, j)] + h / 6.0 * (k1[(i, j)] + 2.0 * k2[(i, j)] + 2.0 * k3[(i, j)] + k4[(i, j)])
        });
        hermitian_part(&next)
    }

    /// RK4 with fixed step, trace drift check and renormalization.
    pub fn integrate(&self, rho: &ComplexMatrix, t: f64, dt: f64) -> Result<ComplexMatrix> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("evolution time must be nonnegative, got {t}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {dt}")));
        }
        let x = t / dt;
        let steps = (x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize;
        let mut cur = rho.clone();
        if steps == 0 {
            return Ok(cur);
        }
        let h = t / steps as f64;
        for _ in 0..steps {
            let before = trace(&cur).re;
            cur = self.rk4_step(&cur, h);
            let after = trace(&cur).re;
            let drift = (after - before).abs();
            if drift > TRACE_DRIFT_TOL || !after.is_finite() {
                return Err(Error::TraceDrift { drift });
            }
            cur = scale(&cur, C64::new(1.0 / after, 0.0));
        }
        Ok(cur)
    }
}

/// `-i[H, rho] + K rho K^dag - 1/2 {K^dag K, rho}`; the commutator only with
/// the coherent part enabled.
pub fn lindbladian_apply(sys: &LindbladSystem, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != sys.dim() {
        return Err(Error::Dimension("state and generator dimensions differ".into()));
    }
    Ok(sys.apply(rho.matrix()))
}

pub fn evolve_ode(sys: &LindbladSystem, rho0: &DensityMatrix, t: f64, dt: f64) -> Result<DensityMatrix> {
    if rho0.dim() != sys.dim() {
        return Err(Error::Dimension("state and generator dimensions differ".into()));
    }
    DensityMatrix::new(sys.integrate(rho0.matrix(), t, dt)?)
}

/// Column-stacking superoperator: `vec(L[rho]) = S vec(rho)`.
pub fn superoperator(sys: &LindbladSystem) -> Result<ComplexMatrix> {
    let n = sys.dim();
    if n > SUPEROPERATOR_MAX_DIM {
        return Err(Error::Dimension(format!("superoperator limited to dimension {SUPEROPERATOR_MAX_DIM}, got {n}")));
    }
    let id = identity(n);
    let tr = |m: &ComplexMatrix| m.transpose().to_owned();
    let conj = |m: &ComplexMatrix| Mat::from_fn(n, n, |i, j| m[(i, j)].conj());
    let half = C64::new(0.5, 0.0);
    let mut s = kron(&conj(&sys.k), &sys.k) - scale(&(kron(&id, &sys.kdk) + kron(&tr(&sys.kdk), &id)), half);
    if sys.include_coherent {
        let h = sys.h.matrix();
        s -= scale(&(kron(&id, h) - kron(&tr(h), &id)), I);
    }
    Ok(s)
}

fn vec_of(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    Mat::from_fn(n * n, 1, |k, _| m[(k % n, k / n)])
}

fn unvec(v: &ComplexMatrix, n: usize) -> ComplexMatrix {
    Mat::from_fn(n, n, |i, j| v[(i + j * n, 0)])
}

/// `e^{L t} rho` through the dense superoperator exponential.
pub fn evolve_superoperator(sys: &LindbladSystem, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let s = superoperator(sys)?;
    let e = expm(&scale(&s, C64::new(t, 0.0)))?;
    DensityMatrix::new(hermitian_part(&unvec(&(e * vec_of(rho.matrix())), sys.dim())))
}

/// `e^{L_K tau} rho` by RK4 with `dt = tau / 1000`.
pub fn exact_dissipative_step(k: &JumpOperator, rho: &DensityMatrix, tau: f64) -> Result<DensityMatrix> {
    if tau == 0.0 {
        return Ok(rho.clone());
    }
    let h = HermitianOperator::new(zeros(k.dim(), k.dim()))?;
    let sys = LindbladSystem::new(&h, k, false)?;
    evolve_ode(&sys, rho, tau, tau / 1000.0)
}

/// `Tr_a e^{-i Kt sqrt(tau)} (|0><0| x rho) e^{i Kt sqrt(tau)}`.
pub fn exact_dilated_step(kt: &DilatedJump, rho: &DensityMatrix, tau: f64) -> Result<DensityMatrix> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("step must be nonnegative, got {tau}")));
    }
    let n = rho.dim();
    if kt.dim() != 2 * n {
        return Err(Error::Dimension("dilated jump must act on ancilla plus system".into()));
    }
    let spec = hermitian_eig(&kt.as_hermitian())?;
    let u = spec.evolution_unitary(tau.sqrt());
    // only the first block column of U touches |0><0| x rho
    let col = u.subcols(0, n).to_owned();
    let joint = &col * rho.matrix() * col.adjoint();
    DensityMatrix::new(hermitian_part(&partial_trace_ancilla(&joint)?))
}

/// `e^{-iH tau} Tr_a(e^{-i Kt sqrt(tau)} (|0><0| x rho) e^{i Kt sqrt(tau)}) e^{iH tau}`.
pub fn discrete_map_exact(sys: &LindbladSystem, rho: &DensityMatrix, tau: f64) -> Result<DensityMatrix> {
    let kt = crate::jump::dilate_matrix(sys.jump());
    let mid = exact_dilated_step(&kt, rho, tau)?;
    if !sys.include_coherent {
        return Ok(mid);
    }
    let u = hermitian_eig(sys.hamiltonian())?.evolution_unitary(tau);
    DensityMatrix::new(hermitian_part(&conjugate(&u, mid.matrix())))
}

/// `e^{-iH t} rho e^{iH t}`.
pub fn hamiltonian_conjugation(h: &HermitianOperator, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let u = hermitian_eig(h)?.evolution_unitary(t);
    DensityMatrix::new(hermitian_part(&conjugate(&u, rho.matrix())))
}
