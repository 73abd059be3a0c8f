//! Layered tail masses for the TFIM-4 spectrum with uniform variance.

use lindblad_ground::filter::FilterParams;
use lindblad_ground::models::{ModelSpec, Problem};
use lindblad_ground::randomcoupling::{mixing_layers_experiment, RandomCouplingSpec};

fn main() -> lindblad_ground::Result<()> {
    let pr = Problem::from_model(&ModelSpec::tfim(4, 1.2))?;
    let e = pr.spectrum.eigenvalues().to_vec();
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap())?.with_clamp(true);
    let sig = RandomCouplingSpec::uniform(e.len(), 1.0)?;
    let p0 = vec![1.0 / e.len() as f64; e.len()];
    let rep = mixing_layers_experiment(&e, &p, &sig, &[12, 8, 4, 0], &p0, 200.0, 2001, 1e-3)?;
    for l in &rep.layers {
        println!(
            "layer {} (levels > {:>2}): min rate out {:.3e}{}  target {:.3}  crossing {}  monotone {}",
            l.layer,
            l.threshold,
            l.min_rate_out,
            if l.violates_rate_floor { " (below floor)" } else { "" },
            l.target,
            l.crossing_time.map_or("none".into(), |t| format!("{t:.2}")),
            l.monotone
        );
    }
    Ok(())
}
