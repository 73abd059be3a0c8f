//! Exact jump operator against its trapezoid approximation, and what
//! happens as the truncation radius grows at fixed spacing.

use lindblad_ground::filter::FilterParams;
use lindblad_ground::jump::{energy_basis_entries, exact_jump, ground_residual, quadrature_jump};
use lindblad_ground::linalg::operator_norm;
use lindblad_ground::models::{ModelSpec, Problem};

fn main() -> lindblad_ground::Result<()> {
    let pr = Problem::from_model(&ModelSpec::tfim(4, 1.2))?;
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap())?;
    let k = exact_jump(&pr.spectrum, &pr.coupling, &p)?;
    println!("|K| = {:.6}, |K psi_0| = {:.3e}", operator_norm(k.matrix())?, ground_residual(&k, &pr.spectrum));

    let clamped = exact_jump(&pr.spectrum, &pr.coupling, &p.with_clamp(true))?;
    println!("clamped filter: |K psi_0| = {:.3e}", ground_residual(&clamped, &pr.spectrum));
    let upward = energy_basis_entries(&clamped, &pr.spectrum, 1e-12).into_iter().filter(|(i, j, _)| i >= j).count();
    println!("clamped entries on or below the diagonal in energy order: {upward}");

    println!("\n{:>8} {:>6} {:>12}", "S_s", "M_s", "|K - K_s|");
    for f in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let q = p.with_truncation(f * p.s_s())?;
        let ks = quadrature_jump(&pr.spectrum, &pr.coupling, &q)?;
        println!("{:>8.3} {:>6} {:>12.3e}", q.s_s(), q.m_s(), operator_norm(&(k.matrix() - ks.matrix()))?);
    }
    Ok(())
}
