//! Curvature lower bounds of the presets and a randomized check of the
//! criterion, including the falsification control.

use entroflow::curvature::{estimate_rho, verify_criterion};
use entroflow::model::{preset, Preset};

fn main() -> entroflow::error::Result<()> {
    for p in [
        Preset::Ou { lambda: 1.0 },
        Preset::Heat,
        Preset::RotatingDrift,
        Preset::TimeVaryingOu { lambda0: 0.5, slope: 1.0 },
    ] {
        let spec = preset(p)?;
        let profile = estimate_rho(&spec, 32)?;
        let ok = verify_criterion(&profile, &spec, 20, 1)?;
        let bad = verify_criterion(&profile.shifted(0.5), &spec, 20, 1)?;
        let (a, b) = spec.horizon;
        println!(
            "{:<16} rho({a}) = {:>6.3} rho({b}) = {:>6.3}  criterion {}  shifted by 0.5: {}",
            p.name(),
            profile.rho(a),
            profile.rho(b),
            if ok.pass { "holds" } else { "fails" },
            if bad.pass { "holds" } else { "fails" },
        );
    }
    Ok(())
}
