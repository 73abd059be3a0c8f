//! The cancelled `W` against the naive product of dense factors, and the
//! cost it saves.

use lindblad_ground::circuit::{build_w, frame_unitary, naive_trotter_product, ChannelConfig, CostLedger, Mode};
use lindblad_ground::filter::FilterParams;
use lindblad_ground::linalg::{conjugate, identity, kron, max_abs_diff};
use lindblad_ground::models::{ModelSpec, Problem};

fn main() -> lindblad_ground::Result<()> {
    let pr = Problem::from_model(&ModelSpec::tfim(4, 1.2))?;
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap())?;
    let tau = 0.3;
    let w = build_w(&pr.spectrum, &pr.coupling, &p, tau)?;
    let naive = naive_trotter_product(&pr.spectrum, &pr.coupling, &p, tau)?;
    let f = kron(&identity(2), &frame_unitary(&pr.spectrum, &p));
    println!("max |W - F naive F^dag| = {:.2e}", max_abs_diff(&w, &conjugate(&f, &naive)));
    println!("max |W^dag W - I|       = {:.2e}", max_abs_diff(&(w.adjoint() * &w), &identity(32)));

    let cost = CostLedger::per_step(&p, &ChannelConfig::new(Mode::Continuous, 0.1, 0.1));
    // without cancellation every factor is conjugated by e^{-+iH s_l}
    let naive_time: f64 = 2.0 * (-(p.m_s() as i64)..=p.m_s() as i64).map(|l| 2.0 * (l as f64 * p.tau_s()).abs()).sum::<f64>();
    println!("per-step Hamiltonian time {:.2} (uncancelled {:.2}), controlled-A gates {}", cost.hamiltonian_time, naive_time, cost.controlled_a_count);
    Ok(())
}
