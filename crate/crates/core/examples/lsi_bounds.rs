//! Constants c(s,t), d(t) and c(t) for a constant and a time-varying
//! curvature.

use entroflow::bounds::{c_envelope_constant, c_st_constant, d_constant, DecayEnvelope};
use entroflow::curvature::CurvatureProfile;

fn main() -> entroflow::error::Result<()> {
    let d0 = 0.5;
    println!("constant rho = 0: c(t) = 1/(1 + t/d0)");
    let flat = DecayEnvelope::new(d0, &CurvatureProfile::constant(0.0, (0.0, 10.0))?)?;
    for t in [0.0, 1.0, 5.0, 10.0] {
        println!("  t = {t:>4}: {:.10} vs {:.10}", flat.c_envelope(t)?, 1.0 / (1.0 + t / d0));
    }
    println!("constant rho = 1:");
    for t in [0.5, 2.0] {
        println!(
            "  t = {t}: c_st {:.8} d {:.8} c {:.8}",
            c_st_constant(1.0, t),
            d_constant(d0, 1.0, t),
            c_envelope_constant(d0, 1.0, t)
        );
    }
    println!("rho(t) = t - 1 on [0, 4]:");
    let ramp = DecayEnvelope::new(d0, &CurvatureProfile::from_fn(|t| t - 1.0, (0.0, 4.0), 65)?)?;
    for t in [0.0, 1.0, 2.0, 4.0] {
        println!(
            "  t = {t}: c_st(0,t) {:.6} d {:.6} c {:.6}",
            ramp.c_st_from_start(t)?,
            ramp.d_t(t)?,
            ramp.c_envelope(t)?
        );
    }
    Ok(())
}
