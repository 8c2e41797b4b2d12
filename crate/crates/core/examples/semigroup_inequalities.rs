//! Randomized commutation and log-Sobolev checks on OU(1), with the
//! curvature inflated as a control.

use entroflow::curvature::estimate_rho;
use entroflow::entropy::PhiFunction;
use entroflow::model::{preset, Preset};
use entroflow::semigroup::{run_suite, SuiteCheck};

fn main() -> entroflow::error::Result<()> {
    let spec = preset(Preset::Ou { lambda: 1.0 })?;
    let profile = estimate_rho(&spec, 64)?;
    for (label, p) in [("estimated", profile.clone()), ("rho + 0.5", profile.shifted(0.5))] {
        for check in [
            SuiteCheck::Commutation,
            SuiteCheck::PhiSobolev(PhiFunction::Kl),
            SuiteCheck::PhiSobolev(PhiFunction::Variance),
        ] {
            let r = run_suite(check, &spec, &p, 8, 5)?;
            println!(
                "{label:<10} {:<13} worst {:>11.3e} tol {:>9.2e} {}",
                r.kind.to_string(),
                r.worst_residual,
                r.tolerance,
                if r.pass() { "pass" } else { "FAIL" }
            );
        }
    }
    Ok(())
}
