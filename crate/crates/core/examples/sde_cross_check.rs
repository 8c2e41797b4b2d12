//! Euler–Maruyama histogram against the finite-volume density for OU(1).

use entroflow::closed_forms::GaussianLaw;
use entroflow::density::DensityGrid;
use entroflow::fokker_planck::{evolve, AdvectionScheme};
use entroflow::model::{preset, Preset, SpatialGrid};
use entroflow::sde::{empirical_density, simulate, StartLaw};

fn main() -> entroflow::error::Result<()> {
    let spec = preset(Preset::Ou { lambda: 1.0 })?;
    let u0 = DensityGrid::gaussian(spec.grid, &[1.0], 0.25)?;
    let pde = evolve(&u0, &spec, 0.0, &[1.0], AdvectionScheme::default())?.remove(0);
    let start = StartLaw::Gaussian { mean: [1.0, 0.0], variance: 0.25 };
    let paths = simulate(&spec, &start, 0.0, 1.0, 100_000, 1e-3, 42)?;
    let coarse = SpatialGrid::new_1d(-5.0, 5.0, 64)?;
    let hist = empirical_density(&paths, &coarse)?;
    let exact = GaussianLaw::new(vec![(-1.0f64).exp()], 1.0 - 0.75 * (-2.0f64).exp())?;
    let pde_l1 = pde.l1_distance(&exact.on_grid(spec.grid)?)?;
    let pde_coarse = DensityGrid::from_fn(coarse, |x| {
        let k = spec.grid.locate(x).expect("coarse grid inside the solver grid");
        pde.values()[k]
    })?;
    println!("paths mean {:.4} var {:.4}", paths.mean()[0], paths.variance()[0]);
    println!("exact mean {:.4} var {:.4}", exact.mean[0], exact.variance);
    println!("L1(pde, exact) = {pde_l1:.2e}");
    println!("L1(histogram, pde) = {:.3}", hist.density.l1_distance(&pde_coarse)?);
    Ok(())
}
