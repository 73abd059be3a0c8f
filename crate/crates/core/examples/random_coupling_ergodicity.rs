//! Monte Carlo populations under a freshly drawn coupling every step,
//! against the transition-matrix expectation.

use lindblad_ground::filter::FilterParams;
use lindblad_ground::randomcoupling::{ergodicity_experiment, MonteCarlo, RandomCouplingSpec};
use lindblad_ground::verify::{ergodicity_spectrum, ERGODICITY_SEED, ERGODICITY_SIGMA};

fn main() -> lindblad_ground::Result<()> {
    let e = ergodicity_spectrum();
    let n = e.len();
    let p = FilterParams::default_params(3.5, 1.0)?.with_clamp(true);
    let sig = RandomCouplingSpec::uniform(n, ERGODICITY_SIGMA)?;
    let mc = MonteCarlo { reps: 500, tau: 0.01, seed: ERGODICITY_SEED };
    let r = ergodicity_experiment(&e, &p, &sig, &vec![1.0 / n as f64; n], &mc, 20.0, 10)?;

    println!("{:>6} {:>10} {:>10} {:>10}", "t", "p0 (MC)", "se", "p0 (T)");
    for (k, t) in r.times.iter().enumerate() {
        println!("{t:>6.1} {:>10.5} {:>10.5} {:>10.5}", r.mc_mean[k][0], r.mc_se[k][0], r.expected[k][0]);
    }
    println!("max z over all levels and checkpoints: {:.2}", r.max_z);
    println!("e^(Tt) p0 at t = {:.0}: distance to e0 {:.1e}", r.long_time, r.long_time_deviation);
    Ok(())
}
