//! The filter in frequency and time, and the default parameter rule.

use lindblad_ground::filter::{f_hat, f_time, quadrature_grid, FilterParams};

fn main() -> lindblad_ground::Result<()> {
    // TFIM-6 sized numbers
    let p = FilterParams::default_params(7.5, 0.4)?;
    println!("a {:.3} delta_a {:.3} b {:.3} delta_b {:.3}", p.a(), p.delta_a(), p.b(), p.delta_b());
    println!("S_s {:.3} tau_s {:.5} M_s {} ({} nodes)", p.s_s(), p.tau_s(), p.m_s(), quadrature_grid(&p).len());

    println!("\n{:>9} {:>12} {:>12}", "omega", "f_hat", "clamped");
    let clamped = p.with_clamp(true);
    for k in 0..=16 {
        let w = -24.0 + 2.0 * k as f64;
        println!("{w:>9.2} {:>12.4e} {:>12.4e}", f_hat(w, &p), f_hat(w, &clamped));
    }

    println!("\n{:>9} {:>12}", "s", "|f(s)|");
    for k in 0..=12 {
        let s = p.s_s() * k as f64 / 6.0;
        println!("{s:>9.3} {:>12.4e}", f_time(s, &p).norm());
    }
    Ok(())
}
