//! One-ancilla dilation: the reduced step converges to the dissipative
//! evolution with error quadratic in the step.

use lindblad_ground::filter::FilterParams;
use lindblad_ground::jump::{dilate, quadrature_jump};
use lindblad_ground::linalg::trace_norm;
use lindblad_ground::models::{ModelSpec, Problem};
use lindblad_ground::reference::{exact_dilated_step, exact_dissipative_step};
use lindblad_ground::stats::loglog_slope;
use lindblad_ground::verify::random_density;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lindblad_ground::Result<()> {
    let pr = Problem::from_model(&ModelSpec::tfim(2, 1.2))?;
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap())?;
    let k = quadrature_jump(&pr.spectrum, &pr.coupling, &p)?;
    let kt = dilate(&k);
    let rho = random_density(4, &mut ChaCha8Rng::seed_from_u64(1));

    let taus = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let mut errs = Vec::new();
    for &t in &taus {
        let e = trace_norm(&(exact_dilated_step(&kt, &rho, t)?.matrix() - exact_dissipative_step(&k, &rho, t)?.matrix()))?;
        println!("tau {t:<7} error {e:.3e}");
        errs.push(e);
    }
    println!("slope {:.3}", loglog_slope(&taus, &errs));
    Ok(())
}
