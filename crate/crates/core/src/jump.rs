//! Jump operators built from the filter, and the one-ancilla dilation.

use faer::Mat;
use serde::Serialize;

use crate::filter::{f_hat, quadrature_grid, FilterParams, QuadratureGrid};
use crate::linalg::{ComplexMatrix, HermitianOperator, SpectralDecomposition, C64, I, ZERO};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpProvenance {
    ExactFrequency,
    Quadrature,
}

#[derive(Clone, Debug)]
pub struct JumpOperator {
    matrix: ComplexMatrix,
    provenance: JumpProvenance,
    params: FilterParams,
}

impl JumpOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
    pub fn provenance(&self) -> JumpProvenance {
        self.provenance
    }
    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    /// Wraps an arbitrary square matrix, e.g. a jump sampled in a test.
    pub fn from_matrix(matrix: ComplexMatrix, provenance: JumpProvenance, params: FilterParams) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension("jump operator must be square".into()));
        }
        if !crate::linalg::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        Ok(Self { matrix, provenance, params })
    }
}

fn check_dims(spec: &SpectralDecomposition, a: &HermitianOperator) -> Result<()> {
    if spec.dim() != a.dim() {
        return Err(Error::Dimension(format!(
            "spectrum has dimension {} but coupling has {}",
            spec.dim(),
            a.dim()
        )));
    }
    Ok(())
}

/// `F_ij = f_hat(lambda_i - lambda_j)`.
pub fn filter_matrix(spec: &SpectralDecomposition, p: &FilterParams) -> Mat<f64> {
    let l = spec.eigenvalues();
    Mat::from_fn(l.len(), l.len(), |i, j| f_hat(l[i] - l[j], p))
}

/// `K` in the energy basis: `F o (V^dag A V)`.
pub fn exact_jump_energy_basis(spec: &SpectralDecomposition, a: &HermitianOperator, p: &FilterParams) -> Result<ComplexMatrix> {
    check_dims(spec, a)?;
    let a_e = spec.to_eigenbasis(a.matrix());
    let f = filter_matrix(spec, p);
    Ok(Mat::from_fn(a_e.nrows(), a_e.ncols(), |i, j| a_e[(i, j)] * f[(i, j)]))
}

/// `K = sum_ij f_hat(lambda_i - lambda_j) |i><i|A|j><j|`.
pub fn exact_jump(spec: &SpectralDecomposition, a: &HermitianOperator, p: &FilterParams) -> Result<JumpOperator> {
    let k_e = exact_jump_energy_basis(spec, a, p)?;
    Ok(JumpOperator { matrix: spec.from_eigenbasis(&k_e), provenance: JumpProvenance::ExactFrequency, params: *p })
}

/// `G_ij = sum_l w_l f(s_l) e^{i (lambda_i - lambda_j) s_l}`.
pub fn quadrature_filter_matrix(spec: &SpectralDecomposition, p: &FilterParams, grid: &QuadratureGrid) -> ComplexMatrix {
    let l = spec.eigenvalues();
    let n = l.len();
    let wf = grid.weighted_kernel(p);
    Mat::from_fn(n, n, |i, j| {
        let d = l[i] - l[j];
        grid.nodes.iter().zip(&wf).fold(ZERO, |acc, (&s, &c)| acc + c * (I * d * s).exp())
    })
}

/// `K_s = sum_l w_l f(s_l) e^{iH s_l} A e^{-iH s_l}` on the default grid.
pub fn quadrature_jump(spec: &SpectralDecomposition, a: &HermitianOperator, p: &FilterParams) -> Result<JumpOperator> {
    quadrature_jump_on_grid(spec, a, p, &quadrature_grid(p))
}

/// Same as [`quadrature_jump`] with a caller-supplied grid.
pub fn quadrature_jump_on_grid(
    spec: &SpectralDecomposition,
    a: &HermitianOperator,
    p: &FilterParams,
    grid: &QuadratureGrid,
) -> Result<JumpOperator> {
    check_dims(spec, a)?;
    let a_e = spec.to_eigenbasis(a.matrix());
    let g = quadrature_filter_matrix(spec, p, grid);
    let k_e = Mat::from_fn(a_e.nrows(), a_e.ncols(), |i, j| a_e[(i, j)] * g[(i, j)]);
    let matrix = spec.from_eigenbasis(&k_e);
    if !crate::linalg::is_finite(&matrix) {
        return Err(Error::NonFinite);
    }
    Ok(JumpOperator { matrix, provenance: JumpProvenance::Quadrature, params: *p })
}

/// `[[0, K^dag], [K, 0]]` with the ancilla leading.
#[derive(Clone, Debug)]
pub struct DilatedJump {
    matrix: ComplexMatrix,
}

impl DilatedJump {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator::new(self.matrix.clone()).expect("dilation is Hermitian by construction")
    }
}

pub fn dilate(k: &JumpOperator) -> DilatedJump {
    dilate_matrix(k.matrix())
}

pub fn dilate_matrix(k: &ComplexMatrix) -> DilatedJump {
    let n = k.nrows();
    let matrix = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (false, true) => k[(i - n, j)],
        (true, false) => k[(j - n, i)].conj(),
        _ => ZERO,
    });
    DilatedJump { matrix }
}

/// `|K psi_0|`.
pub fn ground_residual(k: &JumpOperator, spec: &SpectralDecomposition) -> f64 {
    let psi = spec.ground_state();
    (k.matrix() * &psi).norm_l2()
}

/// Entries of `K` in the energy basis with modulus above `threshold`.
pub fn energy_basis_entries(k: &JumpOperator, spec: &SpectralDecomposition, threshold: f64) -> Vec<(usize, usize, C64)> {
    let k_e = spec.to_eigenbasis(k.matrix());
    let mut out = Vec::new();
    for i in 0..k_e.nrows() {
        for j in 0..k_e.ncols() {
            if k_e[(i, j)].norm() > threshold {
                out.push((i, j, k_e[(i, j)]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, identity, kron, max_abs, max_abs_diff, operator_norm, ONE};
    use crate::models::{Problem, ModelSpec};

    fn pauli_x() -> ComplexMatrix {
        Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
    }

    fn tfim4() -> (Problem, FilterParams) {
        let pr = Problem::from_model(&ModelSpec::tfim(4, 1.2)).unwrap();
        let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap()).unwrap();
        (pr, p)
    }

    #[test]
    fn identity_coupling_clamped_gives_zero() {
        let h = HermitianOperator::from_real_diagonal(&[-1.0, 0.3, 2.0]);
        let spec = hermitian_eig(&h).unwrap();
        let p = FilterParams::default_params(2.0, 1.3).unwrap().with_clamp(true);
        let a = HermitianOperator::new(identity(3)).unwrap();
        let k = exact_jump(&spec, &a, &p).unwrap();
        assert_eq!(max_abs(k.matrix()), 0.0);
    }

    #[test]
    fn two_level_only_downward_transition() {
        let z = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        let spec = hermitian_eig(&z).unwrap();
        let p = FilterParams::default_params(1.0, 2.0).unwrap().with_clamp(true);
        let k = exact_jump(&spec, &HermitianOperator::new(pauli_x()).unwrap(), &p).unwrap();
        let k_e = spec.to_eigenbasis(k.matrix());
        assert!((k_e[(0, 1)].norm() - f_hat(-2.0, &p)).abs() < 1e-15);
        assert_eq!(k_e[(1, 0)], ZERO);
        assert_eq!(k_e[(0, 0)], ZERO);
        assert_eq!(k_e[(1, 1)], ZERO);
    }

    #[test]
    fn tfim4_fixed_point_and_triangular_structure() {
        let (pr, p) = tfim4();
        let k = exact_jump(&pr.spectrum, &pr.coupling, &p.with_clamp(true)).unwrap();
        assert!(ground_residual(&k, &pr.spectrum) < 1e-12);
        let l = pr.spectrum.eigenvalues();
        let k_e = pr.spectrum.to_eigenbasis(k.matrix());
        for i in 0..l.len() {
            for j in 0..l.len() {
                if l[i] >= l[j] {
                    assert!(k_e[(i, j)].norm() < 1e-12);
                }
            }
        }
        let kt = dilate(&k);
        let mut v = faer::Col::<C64>::zeros(2 * l.len());
        let g = pr.spectrum.ground_state();
        for i in 0..l.len() {
            v[i] = g[i];
        }
        assert!((kt.matrix() * &v).norm_l2() < 1e-12);
    }

    #[test]
    fn tfim4_unclamped_residual_and_quadrature() {
        let (pr, p) = tfim4();
        let a_norm = operator_norm(pr.coupling.matrix()).unwrap();
        let k = exact_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
        let r = ground_residual(&k, &pr.spectrum);
        let bound = (f_hat(0.0, &p) + f_hat(pr.spectrum.gap(), &p)) * a_norm;
        assert!(r <= bound && r <= 0.1 * a_norm, "{r} {bound}");
        let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
        assert!((ground_residual(&ks, &pr.spectrum) - r).abs() <= 2e-3 * a_norm);
        assert!(operator_norm(&(k.matrix() - ks.matrix())).unwrap() <= 1e-3 * a_norm);
    }

    #[test]
    fn quadrature_in_eigenbasis_matches_operator_products() {
        let pr = Problem::from_model(&ModelSpec::tfim(2, 1.2)).unwrap();
        let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap()).unwrap();
        let grid = quadrature_grid(&p);
        let mut want = crate::linalg::zeros(4, 4);
        for (&s, &w) in grid.nodes.iter().zip(&grid.weights) {
            let u = pr.spectrum.evolution_unitary(-s);
            let heis = &u * pr.coupling.matrix() * u.adjoint();
            want += crate::linalg::scale(&heis, crate::filter::f_time(s, &p) * w);
        }
        let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &p).unwrap();
        assert!(max_abs_diff(ks.matrix(), &want) < 1e-12);
    }

    #[test]
    fn zero_coupling_gives_zero_quadrature() {
        let (pr, p) = tfim4();
        let a = HermitianOperator::new(crate::linalg::zeros(16, 16)).unwrap();
        assert_eq!(max_abs(quadrature_jump(&pr.spectrum, &a, &p).unwrap().matrix()), 0.0);
    }

    #[test]
    fn dilation_blocks() {
        let p = FilterParams::default_params(1.0, 1.0).unwrap();
        let k = JumpOperator::from_matrix(identity(2), JumpProvenance::Quadrature, p).unwrap();
        assert!(max_abs_diff(dilate(&k).matrix(), &kron(&pauli_x(), &identity(2))) < 1e-15);
        let m = Mat::from_fn(3, 3, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64 - 2.0 * j as f64) * 0.2));
        let kt = dilate_matrix(&m);
        let spec = hermitian_eig(&kt.as_hermitian()).unwrap();
        let mut sv: Vec<f64> = m.singular_values().unwrap().to_vec();
        sv.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = sv.iter().map(|s| -s).chain(sv.iter().cloned()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in spec.eigenvalues().iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(kt.matrix()[(i, j)], ZERO);
                assert_eq!(kt.matrix()[(i + 3, j + 3)], ZERO);
                assert_eq!(kt.matrix()[(i + 3, j)], m[(i, j)]);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_refused() {
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        let spec = hermitian_eig(&h).unwrap();
        let p = FilterParams::default_params(1.0, 1.0).unwrap();
        let a = HermitianOperator::new(identity(3)).unwrap();
        assert!(exact_jump(&spec, &a, &p).is_err());
    }
}
