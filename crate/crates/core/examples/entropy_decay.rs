//! Two OU(1) orbits, their relative entropy and the envelope H(0)c(t).

use entroflow::closed_forms::{gaussian_kl, ou_propagate, GaussianLaw};
use entroflow::density::DensityGrid;
use entroflow::entropy::PhiFunction;
use entroflow::fokker_planck::evolve_pair;
use entroflow::model::{preset, Preset};

fn main() -> entroflow::error::Result<()> {
    let spec = preset(Preset::Ou { lambda: 1.0 })?;
    let u0 = DensityGrid::gaussian(spec.grid, &[1.0], 1.0)?;
    let v0 = DensityGrid::gaussian(spec.grid, &[0.0], 1.0)?;
    let times = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
    let pair = evolve_pair(&u0, &v0, &spec, PhiFunction::Kl, &times, Some(0.5))?;
    let envelope = pair.envelope.as_ref().expect("kl with d0 has an envelope");
    println!("{:>4} {:>12} {:>12} {:>12} {:>12}", "t", "H", "exact", "H0*c(t)", "dissipation");
    for (k, &t) in times.iter().enumerate() {
        let p = ou_propagate(&GaussianLaw::new(vec![1.0], 1.0)?, t, 1.0)?;
        let q = ou_propagate(&GaussianLaw::new(vec![0.0], 1.0)?, t, 1.0)?;
        println!(
            "{t:>4} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e}",
            pair.entropy[k],
            gaussian_kl(&p, &q)?,
            envelope[k],
            pair.dissipation[k]
        );
    }
    println!("steps {}, mass drift {:e}", pair.steps, pair.max_mass_drift());
    Ok(())
}
