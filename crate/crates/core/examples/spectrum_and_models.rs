//! Spectra of the bundled models and a look at their couplings.
//!
//! `cargo run --example spectrum_and_models`

use lindblad_ground::linalg::operator_norm;
use lindblad_ground::models::{ModelSpec, Problem};

fn main() -> lindblad_ground::Result<()> {
    for model in [ModelSpec::tfim(2, 1.2), ModelSpec::tfim(4, 1.2), ModelSpec::tfim(6, 1.2), ModelSpec::hubbard(4, 1.0, 4.0)] {
        let pr = Problem::from_model(&model)?;
        let s = &pr.spectrum;
        let ev = s.eigenvalues();
        println!("{}", model.label());
        println!("  dim {}  |H| {:.4}  |A| {:.4}", s.dim(), s.spectral_norm(), operator_norm(pr.coupling.matrix())?);
        println!("  lambda_0 {:.6}  gap {:.6}  ground degeneracy {}", ev[0], s.gap(), s.ground_degeneracy());
        let head: Vec<String> = ev.iter().take(6).map(|x| format!("{x:.4}")).collect();
        println!("  lowest levels {}", head.join(" "));
    }
    Ok(())
}
