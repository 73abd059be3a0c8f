//! Dense complex linear algebra on top of `faer`.
//!
//! Everything in the crate is dense: systems are capped at a dozen qubits.
//! Tensor products put the first argument on the leading (most significant)
//! index, so `kron(ancilla, system)` has the ancilla as the outer block.

use faer::prelude::*;
use faer::{Col, Mat, Side};
pub use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub type ComplexMatrix = Mat<C64>;
pub type ComplexVector = Col<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Relative tolerance used for Hermiticity and state validation.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn identity(n: usize) -> ComplexMatrix {
    Mat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    Mat::zeros(rows, cols)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint().to_owned()
}

pub fn scale(m: &ComplexMatrix, c: C64) -> ComplexMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    max_abs(&(a - b))
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.norm_l2()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{what} must be square, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(M + M^dag) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// `U M U^dag`.
pub fn conjugate(u: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    u * m * u.adjoint()
}

pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let s = m.singular_values().map_err(|_| Error::NoConvergence("singular value decomposition"))?;
    Ok(s.iter().cloned().fold(0.0, f64::max))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let s = m.singular_values().map_err(|_| Error::NoConvergence("singular value decomposition"))?;
    Ok(s.iter().sum())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Traces out a leading ancilla qubit: `rho_00 + rho_11` in block form.
pub fn partial_trace_ancilla(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = require_square(m, "partial trace input")?;
    if d % 2 != 0 || d == 0 {
        return Err(Error::Dimension(format!("partial trace needs an even dimension, got {d}")));
    }
    let n = d / 2;
    Ok(Mat::from_fn(n, n, |i, j| m[(i, j)] + m[(i + n, j + n)]))
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = require_square(m, "exponent")?;
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let norm1 = (0..n).map(|j| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = scale(m, C64::new(0.5f64.powi(s), 0.0));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let r = |c: f64| C64::new(c, 0.0);
    let lin = |x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix, cx: f64, cy: f64, cz: f64| {
        Mat::from_fn(n, n, |i, j| x[(i, j)] * r(cx) + y[(i, j)] * r(cy) + z[(i, j)] * r(cz))
    };
    let u_inner = &a6 * lin(&a6, &a4, &a2, B[13], B[11], B[9]) + lin(&a6, &a4, &a2, B[7], B[5], B[3]) + scale(&id, r(B[1]));
    let u = &a * u_inner;
    let v = &a6 * lin(&a6, &a4, &a2, B[12], B[10], B[8]) + lin(&a6, &a4, &a2, B[6], B[4], B[2]) + scale(&id, r(B[0]));
    let p = &v + &u;
    let q = &v - &u;
    let mut x = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        x = &x * &x;
    }
    if !is_finite(&x) {
        return Err(Error::NonFinite);
    }
    Ok(x)
}

/// A validated Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Accepts deviations up to `1e-10 * max(1, max|M_ij|)` and symmetrizes.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        require_square(&matrix, "Hermitian operator")?;
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self { matrix: hermitian_part(&matrix) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self { matrix: Mat::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO }) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Ascending eigenvalues with eigenvectors in columns.
///
/// Each eigenvector is rephased so that its largest-magnitude component
/// (first one on ties) is real and positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

pub fn hermitian_eig(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::Dimension("empty operator".into()));
    }
    let eig = h
        .matrix()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence("Hermitian eigensolver"))?;
    let vals: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut vecs = zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let peak = (0..n).map(|i| u[(i, src)].norm()).fold(0.0, f64::max);
        let k = (0..n).find(|&i| u[(i, src)].norm() >= peak * (1.0 - 1e-12)).unwrap_or(0);
        let ph = u[(k, src)].conj() / u[(k, src)].norm();
        for i in 0..n {
            vecs[(i, col)] = u[(i, src)] * ph;
        }
    }
    let eigenvalues: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    if eigenvalues.iter().any(|v| !v.is_finite()) || !is_finite(&vecs) {
        return Err(Error::NonFinite);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: vecs })
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Degeneracy tolerance for grouping the ground space.
    pub fn degeneracy_tol(&self) -> f64 {
        1e-9 * self.spectral_norm().max(1.0)
    }

    pub fn ground_degeneracy(&self) -> usize {
        let tol = self.degeneracy_tol();
        self.eigenvalues.iter().take_while(|&&v| v - self.eigenvalues[0] <= tol).count()
    }

    /// `lambda_1 - lambda_0`, zero for a one-dimensional space.
    pub fn gap(&self) -> f64 {
        if self.dim() < 2 {
            0.0
        } else {
            self.eigenvalues[1] - self.eigenvalues[0]
        }
    }

    /// `max |lambda|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn state(&self, k: usize) -> ComplexVector {
        self.eigenvectors.col(k).to_owned()
    }

    pub fn ground_state(&self) -> ComplexVector {
        self.state(0)
    }

    /// `e^{-i H t}`.
    pub fn evolution_unitary(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * (-I * self.eigenvalues[j] * t).exp());
        scaled * v.adjoint()
    }

    /// Diagonal of `e^{-i H t}` in the energy basis.
    pub fn phases(&self, t: f64) -> Vec<C64> {
        self.eigenvalues.iter().map(|&l| (-I * l * t).exp()).collect()
    }

    /// `V^dag M V`.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `V M V^dag`.
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }

    /// `<psi_k| M |psi_k>` for every `k`.
    pub fn diagonal_in_eigenbasis(&self, m: &ComplexMatrix) -> Vec<f64> {
        let t = self.to_eigenbasis(m);
        (0..self.dim()).map(|k| t[(k, k)].re).collect()
    }
}

pub fn evolution_unitary(spec: &SpectralDecomposition, t: f64) -> ComplexMatrix {
    spec.evolution_unitary(t)
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-9;
    pub const PSD_TOL: f64 = 1e-9;

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = require_square(&matrix, "density matrix")?;
        if n == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL.max(1e-9) {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let m = hermitian_part(&matrix);
        let tr = trace(&m).re;
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let eig = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence("Hermitian eigensolver"))?;
        let min = (0..n).map(|i| eig.S()[i].re).fold(f64::INFINITY, f64::min);
        if min < -Self::PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix: m })
    }

    pub fn from_pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm_l2();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let n = psi.nrows();
        let m = Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self { matrix: scale(&identity(n), C64::new(1.0 / n as f64, 0.0)) }
    }

    /// Diagonal state with the given populations in the supplied basis
    /// (columns of `basis`), or the computational basis if `None`.
    pub fn from_populations(p: &[f64], basis: Option<&ComplexMatrix>) -> Result<Self> {
        let n = p.len();
        let d = Mat::from_fn(n, n, |i, j| if i == j { C64::new(p[i], 0.0) } else { ZERO });
        let m = match basis {
            Some(v) => conjugate(v, &d),
            None => d,
        };
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Re Tr(O rho)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += op[(i, k)] * self.matrix[(k, i)];
            }
        }
        acc.re
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("trace distance between different dimensions".into()));
        }
        Ok(0.5 * trace_norm(&(&self.matrix - &other.matrix))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli() -> [ComplexMatrix; 4] {
        let c = |re: f64, im: f64| C64::new(re, im);
        [
            Mat::from_fn(2, 2, |i, j| if i == j { ONE } else { ZERO }),
            Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO }),
            Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => c(0.0, -1.0),
                (1, 0) => c(0.0, 1.0),
                _ => ZERO,
            }),
            Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => ONE,
                (1, 1) => -ONE,
                _ => ZERO,
            }),
        ]
    }

    #[test]
    fn pauli_eigenvalues() {
        let p = pauli();
        for s in &p[1..] {
            let e = hermitian_eig(&HermitianOperator::new(s.clone()).unwrap()).unwrap();
            assert!((e.eigenvalues()[0] + 1.0).abs() < 1e-14);
            assert!((e.eigenvalues()[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn kron_of_x_and_z_has_four_unit_eigenvalues() {
        let p = pauli();
        let xz = kron(&p[1], &p[3]);
        let e = hermitian_eig(&HermitianOperator::new(xz.clone()).unwrap()).unwrap();
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in e.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-13);
        }
        // leading factor acts on the outer block
        assert_eq!(xz[(2, 0)], ONE);
        assert_eq!(xz[(3, 1)], -ONE);
    }

    #[test]
    fn rephasing_makes_peak_component_positive() {
        let m = Mat::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let e = hermitian_eig(&HermitianOperator::new(m).unwrap()).unwrap();
        for k in 0..3 {
            let v = e.state(k);
            let peak = (0..3).map(|i| v[i].norm()).fold(0.0, f64::max);
            let idx = (0..3).find(|&i| v[i].norm() >= peak * (1.0 - 1e-12)).unwrap();
            assert!(v[idx].im.abs() < 1e-14 && v[idx].re > 0.0);
        }
    }

    #[test]
    fn expm_of_pauli_rotation() {
        let p = pauli();
        let theta = 0.73;
        let u = expm(&scale(&p[2], -I * theta)).unwrap();
        let want = scale(&p[0], C64::new(theta.cos(), 0.0)) - scale(&p[2], I * theta.sin());
        assert!(max_abs_diff(&u, &want) < 1e-14);
    }

    #[test]
    fn expm_matches_spectral_route_for_large_norm() {
        let m = Mat::from_fn(6, 6, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64, ((i + 2 * j) % 3) as f64 - 1.0));
        let h = HermitianOperator::new(hermitian_part(&m)).unwrap();
        let e = hermitian_eig(&h).unwrap();
        let t = 3.7;
        let u = expm(&scale(h.matrix(), -I * t)).unwrap();
        assert!(max_abs_diff(&u, &e.evolution_unitary(t)) < 1e-11);
    }

    #[test]
    fn partial_trace_of_product() {
        let p = pauli();
        let ra = DensityMatrix::from_populations(&[0.3, 0.7], None).unwrap();
        let rs = hermitian_part(&(scale(&p[0], C64::new(0.5, 0.0)) + scale(&p[1], C64::new(0.2, 0.0))));
        let joint = kron(ra.matrix(), &rs);
        assert!(max_abs_diff(&partial_trace_ancilla(&joint).unwrap(), &rs) < 1e-15);
        assert!(partial_trace_ancilla(&zeros(3, 3)).is_err());
    }

    #[test]
    fn trace_norm_of_hermitian_is_sum_of_abs_eigenvalues() {
        let m = Mat::from_fn(4, 4, |i, j| C64::new(1.0 / (1 + i + j) as f64, 0.1 * (i as f64 - j as f64)));
        let h = HermitianOperator::new(hermitian_part(&m)).unwrap();
        let e = hermitian_eig(&h).unwrap();
        let want: f64 = e.eigenvalues().iter().map(|v| v.abs()).sum();
        assert!((trace_norm(h.matrix()).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn density_validation() {
        let p = pauli();
        assert!(DensityMatrix::new(p[3].clone()).is_err());
        assert!(DensityMatrix::new(scale(&p[0], C64::new(0.5, 0.0)) + scale(&p[1], C64::new(0.6, 0.0))).is_err());
        assert!(DensityMatrix::new(scale(&p[0], C64::new(0.5, 0.0)) + scale(&p[1], C64::new(0.4, 0.0))).is_ok());
        assert!(HermitianOperator::new(scale(&p[1], I)).is_err());
    }
}
