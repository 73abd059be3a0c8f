//! Four-site Hubbard chain (t = 1, U = 4, 256 states) with the hopping
//! coupling, discrete dynamics tau = 0.5 with two segments per step.

use lindblad_ground::circuit::{run_simulation, ChannelConfig, Mode};
use lindblad_ground::filter::FilterParams;
use lindblad_ground::models::{ModelSpec, Problem};

fn main() -> lindblad_ground::Result<()> {
    let pr = Problem::from_model(&ModelSpec::hubbard(4, 1.0, 4.0))?;
    let p = FilterParams::default_params(pr.spectrum.spectral_norm(), pr.spectrum.gap())?;
    println!("lambda_0 {:.6}, gap {:.4}, |H| {:.3}, M_s {}", pr.spectrum.ground_energy(), pr.spectrum.gap(), pr.spectrum.spectral_norm(), p.m_s());

    let mut cfg = ChannelConfig::new(Mode::Discrete, 0.5, 100.0);
    cfg.segments = 2;
    cfg.seed = 2024;
    cfg.record_stride = 20;
    let rec = run_simulation(&pr, &cfg, &p)?;
    for r in &rec.rows {
        println!("t {:>6.1}  overlap {:.4} +- {:.4}  energy {:.4}", r.time, r.overlap_mean, r.overlap_se, r.energy_mean);
    }
    Ok(())
}
