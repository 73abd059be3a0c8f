//! Ground-state preparation with a single-ancilla Lindblad simulation.
//!
//! The crate builds a filtered jump operator `K` for a Hamiltonian `H` and a
//! coupling `A`, simulates the dissipative dynamics
//! `d rho/dt = -i[H, rho] + K rho K^dag - 1/2 {K^dag K, rho}` with a
//! second-order Trotterized circuit that needs one ancilla qubit, and checks
//! the result against dense reference solvers.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, spectral decompositions, states.
//! - [`models`]: transverse-field Ising and 1D Hubbard Hamiltonians.
//! - [`filter`]: the frequency filter, its time-domain kernel and the grid.
//! - [`jump`]: exact and quadrature jump operators and the dilation.
//! - [`reference`]: Lindbladian application, ODE and exact step maps.
//! - [`circuit`]: the one-ancilla channel, trajectories and cost ledger.
//! - [`randomcoupling`]: random-coupling population dynamics experiments.
//! - [`config`], [`report`], [`verify`]: run configs, CSV/SVG output, checks.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod circuit;
pub mod config;
pub mod error;
pub mod filter;
pub mod jump;
pub mod linalg;
pub mod models;
pub mod randomcoupling;
pub mod reference;
pub mod report;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
