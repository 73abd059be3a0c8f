//! Distance of single realizations from the expectation dynamics as the
//! resampling step shrinks.

use lindblad_ground::randomcoupling::concentration_experiment;
use lindblad_ground::verify::concentration_instance;

fn main() -> lindblad_ground::Result<()> {
    let c = concentration_instance()?;
    let taus = [0.1, 0.05, 0.025, 0.0125];
    let r = concentration_experiment(&c.energies, &c.params, &c.sigma, &c.p0, &taus, c.total_time, 200, 7)?;
    for ((tau, m), se) in taus.iter().zip(&r.mean_deviation).zip(&r.se_deviation) {
        println!("tau {tau:<7} E|rho - diag(p)|_F = {m:.4} +- {se:.4}");
    }
    println!("slope {:.3}", r.slope);
    Ok(())
}
