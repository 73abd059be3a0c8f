//! Model Hamiltonians and coupling operators.
//!
//! Qubit `q` (0-based) sits at bit position `n - 1 - q` of the basis index,
//! so the first site is the leading tensor factor. `|0>` is spin up for the
//! Ising chain (Z eigenvalue +1) and an empty orbital for the Hubbard chain.
//!
//! Hubbard spin orbitals use `q = 2 (j - 1) + sigma` for site `j` (1-based)
//! and `sigma = 0` (up) or `1` (down). The Jordan-Wigner string of `c_q`
//! runs over all orbitals with a smaller index.

use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eig, zeros, ComplexMatrix, HermitianOperator, SpectralDecomposition, C64};
use crate::{Error, Result};

/// Dense storage limit for the system register.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ModelSpec {
    #[serde(rename = "tfim")]
    Tfim { sites: usize, tfim_g: f64 },
    #[serde(rename = "hubbard1d")]
    Hubbard1d {
        sites: usize,
        hubbard_t: f64,
        #[serde(rename = "hubbard_U")]
        hubbard_u: f64,
    },
}

impl ModelSpec {
    pub fn tfim(sites: usize, g: f64) -> Self {
        ModelSpec::Tfim { sites, tfim_g: g }
    }

    pub fn hubbard(sites: usize, t: f64, u: f64) -> Self {
        ModelSpec::Hubbard1d { sites, hubbard_t: t, hubbard_u: u }
    }

    pub fn qubits(&self) -> usize {
        match self {
            ModelSpec::Tfim { sites, .. } => *sites,
            ModelSpec::Hubbard1d { sites, .. } => 2 * sites,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (sites, params): (usize, Vec<f64>) = match self {
            ModelSpec::Tfim { sites, tfim_g } => (*sites, vec![*tfim_g]),
            ModelSpec::Hubbard1d { sites, hubbard_t, hubbard_u } => (*sites, vec![*hubbard_t, *hubbard_u]),
        };
        if sites < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 sites, got {sites}")));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        check_qubits(self.qubits())
    }

    pub fn label(&self) -> String {
        match self {
            ModelSpec::Tfim { sites, tfim_g } => format!("TFIM-{sites} (g={tfim_g})"),
            ModelSpec::Hubbard1d { sites, hubbard_t, hubbard_u } => {
                format!("Hubbard-{sites} (t={hubbard_t}, U={hubbard_u})")
            }
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::TooLarge { qubits: n, max: MAX_QUBITS })
    } else {
        Ok(())
    }
}

fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn real_hermitian(m: ComplexMatrix) -> HermitianOperator {
    HermitianOperator::new(m).expect("model assembly is Hermitian by construction")
}

/// `H = -sum Z_i Z_{i+1} - g sum X_i`, open boundary.
pub fn build_tfim(l: usize, g: f64) -> Result<HermitianOperator> {
    ModelSpec::tfim(l, g).validate()?;
    let dim = 1usize << l;
    let mut h = zeros(dim, dim);
    let z = |x: usize, q: usize| if x & bit(l, q) == 0 { 1.0 } else { -1.0 };
    for x in 0..dim {
        let zz: f64 = (0..l - 1).map(|q| z(x, q) * z(x, q + 1)).sum();
        h[(x, x)] = C64::new(-zz, 0.0);
        for q in 0..l {
            h[(x ^ bit(l, q), x)] += C64::new(-g, 0.0);
        }
    }
    Ok(real_hermitian(h))
}

/// `c_q |x>` as `(sign, x')`, or `None` if the orbital is empty.
fn annihilate(n: usize, q: usize, x: usize) -> Option<(f64, usize)> {
    if x & bit(n, q) == 0 {
        return None;
    }
    Some((jw_sign(n, q, x), x ^ bit(n, q)))
}

fn create(n: usize, q: usize, x: usize) -> Option<(f64, usize)> {
    if x & bit(n, q) != 0 {
        return None;
    }
    Some((jw_sign(n, q, x), x ^ bit(n, q)))
}

fn jw_sign(n: usize, q: usize, x: usize) -> f64 {
    let string = (0..q).filter(|&p| x & bit(n, p) != 0).count();
    if string % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies a product of ladder operators, rightmost first.
fn ladder_chain(n: usize, ops: &[(bool, usize)], x: usize) -> Option<(f64, usize)> {
    let mut sign = 1.0;
    let mut y = x;
    for &(dagger, q) in ops.iter().rev() {
        let (s, z) = if dagger { create(n, q, y)? } else { annihilate(n, q, y)? };
        sign *= s;
        y = z;
    }
    Some((sign, y))
}

fn orbital(site: usize, spin: usize) -> usize {
    2 * site + spin
}

/// `H = -t sum (c^dag_{j s} c_{j+1 s} + h.c.) + U sum (n_{j up} - 1/2)(n_{j dn} - 1/2)`.
pub fn build_hubbard_1d(l: usize, t: f64, u: f64) -> Result<HermitianOperator> {
    ModelSpec::hubbard(l, t, u).validate()?;
    let n = 2 * l;
    let dim = 1usize << n;
    let mut h = zeros(dim, dim);
    for x in 0..dim {
        let occ = |q: usize| if x & bit(n, q) != 0 { 1.0 } else { 0.0 };
        let onsite: f64 = (0..l).map(|j| (occ(orbital(j, 0)) - 0.5) * (occ(orbital(j, 1)) - 0.5)).sum();
        h[(x, x)] += C64::new(u * onsite, 0.0);
        for j in 0..l - 1 {
            for s in 0..2 {
                let (p, q) = (orbital(j, s), orbital(j + 1, s));
                for ops in [[(true, p), (false, q)], [(true, q), (false, p)]] {
                    if let Some((sign, y)) = ladder_chain(n, &ops, x) {
                        h[(y, x)] += C64::new(-t * sign, 0.0);
                    }
                }
            }
        }
    }
    Ok(real_hermitian(h))
}

pub fn build_hamiltonian(model: &ModelSpec) -> Result<HermitianOperator> {
    match *model {
        ModelSpec::Tfim { sites, tfim_g } => build_tfim(sites, tfim_g),
        ModelSpec::Hubbard1d { sites, hubbard_t, hubbard_u } => build_hubbard_1d(sites, hubbard_t, hubbard_u),
    }
}

/// `Z` on the first site for the Ising chain; for the Hubbard chain the local
/// hopping `sum_s c^dag_{1s} c_{2s} - c_{1s} c^dag_{2s}`.
pub fn coupling_operator(model: &ModelSpec) -> Result<HermitianOperator> {
    model.validate()?;
    let n = model.qubits();
    let dim = 1usize << n;
    let mut a = zeros(dim, dim);
    match model {
        ModelSpec::Tfim { .. } => {
            for x in 0..dim {
                a[(x, x)] = C64::new(if x & bit(n, 0) == 0 { 1.0 } else { -1.0 }, 0.0);
            }
        }
        ModelSpec::Hubbard1d { .. } => {
            for x in 0..dim {
                for s in 0..2 {
                    let (p, q) = (orbital(0, s), orbital(1, s));
                    if let Some((sign, y)) = ladder_chain(n, &[(true, p), (false, q)], x) {
                        a[(y, x)] += C64::new(sign, 0.0);
                    }
                    if let Some((sign, y)) = ladder_chain(n, &[(false, p), (true, q)], x) {
                        a[(y, x)] -= C64::new(sign, 0.0);
                    }
                }
            }
        }
    }
    Ok(real_hermitian(a))
}

/// Total particle number (Hubbard register).
pub fn number_operator(l: usize) -> Result<HermitianOperator> {
    let n = 2 * l;
    check_qubits(n)?;
    let diag: Vec<f64> = (0..1usize << n).map(|x| x.count_ones() as f64).collect();
    Ok(HermitianOperator::from_real_diagonal(&diag))
}

/// `S_z = 1/2 sum_j (n_{j up} - n_{j dn})`.
pub fn spin_z_operator(l: usize) -> Result<HermitianOperator> {
    let n = 2 * l;
    check_qubits(n)?;
    let diag: Vec<f64> = (0..1usize << n)
        .map(|x| {
            (0..l)
                .map(|j| {
                    let up = (x & bit(n, orbital(j, 0)) != 0) as i32;
                    let dn = (x & bit(n, orbital(j, 1)) != 0) as i32;
                    0.5 * (up - dn) as f64
                })
                .sum()
        })
        .collect();
    Ok(HermitianOperator::from_real_diagonal(&diag))
}

/// Hamiltonian, coupling and spectral data for one model instance.
#[derive(Clone, Debug)]
pub struct Problem {
    pub model: Option<ModelSpec>,
    pub hamiltonian: HermitianOperator,
    pub coupling: HermitianOperator,
    pub spectrum: SpectralDecomposition,
}

impl Problem {
    pub fn from_model(model: &ModelSpec) -> Result<Self> {
        let hamiltonian = build_hamiltonian(model)?;
        let coupling = coupling_operator(model)?;
        let mut p = Self::from_operators(hamiltonian, coupling)?;
        p.model = Some(model.clone());
        Ok(p)
    }

    pub fn from_operators(hamiltonian: HermitianOperator, coupling: HermitianOperator) -> Result<Self> {
        if hamiltonian.dim() != coupling.dim() {
            return Err(Error::Dimension(format!(
                "Hamiltonian has dimension {} but coupling has {}",
                hamiltonian.dim(),
                coupling.dim()
            )));
        }
        let spectrum = hermitian_eig(&hamiltonian)?;
        if spectrum.gap() <= spectrum.degeneracy_tol() {
            log::warn!("spectrum has no resolvable gap; filter defaults need explicit overrides");
        } else if spectrum.ground_degeneracy() > 1 {
            log::warn!("ground space is {}-fold degenerate", spectrum.ground_degeneracy());
        }
        Ok(Self { model: None, hamiltonian, coupling, spectrum })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}
