//! Heat-flow intermediate asymptotics: the self-similar rescaling
//! `v(y) = √t·u(y√t, t)` and the entropy relative to the fundamental
//! solution.

use std::f64::consts::PI;
use std::io::Write;

use crate::density::DensityGrid;
use crate::entropy::{relative_entropy, PhiFunction};
use crate::error::{Error, Result};
use crate::fokker_planck::{evolve, AdvectionScheme};
use crate::model::{ProblemSpec, SpatialGrid};
use crate::report::csv::fmt_f64;

/// Scaling functions `(α, β, τ) = (√t, √t, ln t)`.
pub fn scaling(t: f64) -> (f64, f64, f64) {
    (t.sqrt(), t.sqrt(), t.ln())
}

/// `v(·, ln t)` on a y-grid.
#[derive(Debug, Clone)]
pub struct RescaledSnapshot {
    pub density: DensityGrid,
    pub t: f64,
    /// `∫u dx` of the source orbit.
    pub mass: f64,
    /// Height of the limit profile `C·exp(−y²/2)`.
    pub c: f64,
}

impl RescaledSnapshot {
    pub fn tau(&self) -> f64 {
        self.t.ln()
    }

    /// `C·exp(−y²/2)` at the y-grid centres.
    pub fn limit_profile(&self) -> Result<DensityGrid> {
        let c = self.c;
        DensityGrid::from_fn(*self.density.grid(), |p| c * (-0.5 * p[0] * p[0]).exp())
    }

    pub fn l1_to_limit(&self) -> Result<f64> {
        self.density.l1_distance(&self.limit_profile()?)
    }

    /// `H(v | v∞)` with the limit profile rescaled to the snapshot mass on
    /// the y-grid.
    pub fn entropy_to_limit(&self) -> Result<f64> {
        let mut target = self.limit_profile()?;
        let m = target.mass();
        let scale = self.density.mass() / m;
        target = DensityGrid::new(*target.grid(), target.values().iter().map(|v| v * scale).collect())?;
        relative_entropy(&self.density, &target, PhiFunction::Kl)
    }
}

fn positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("rescaling needs t > 0, got {t}")))
    }
}

fn one_dimensional(u: &DensityGrid) -> Result<()> {
    if u.grid().dim() == 1 {
        Ok(())
    } else {
        Err(Error::Input("rescaling is one-dimensional".into()))
    }
}

/// Rescale onto the source grid divided by `√t`, so every y-centre maps to
/// an x-centre and no interpolation is needed.
pub fn rescale(u: &DensityGrid, t: f64) -> Result<RescaledSnapshot> {
    positive_time(t)?;
    one_dimensional(u)?;
    let g = u.grid();
    let s = t.sqrt();
    let y_grid = SpatialGrid::new_1d(g.lower()[0] / s, g.upper()[0] / s, g.len())?;
    let values = u.values().iter().map(|v| v * s).collect();
    let mass = u.mass();
    Ok(RescaledSnapshot {
        density: DensityGrid::new(y_grid, values)?,
        t,
        mass,
        c: mass / (2.0 * PI).sqrt(),
    })
}

/// Rescale onto a given y-grid by linear interpolation between x-centres.
/// Between the outermost centre and the wall the edge value is held.
pub fn rescale_onto(u: &DensityGrid, t: f64, y_grid: &SpatialGrid) -> Result<RescaledSnapshot> {
    positive_time(t)?;
    one_dimensional(u)?;
    if y_grid.dim() != 1 {
        return Err(Error::Input("rescaling is one-dimensional".into()));
    }
    let g = u.grid();
    let s = t.sqrt();
    let (lo, hi) = (g.lower()[0], g.upper()[0]);
    if y_grid.lower()[0] * s < lo || y_grid.upper()[0] * s > hi {
        return Err(Error::Coverage(format!(
            "y-range [{}, {}] maps outside the source grid [{lo}, {hi}] at t = {t}",
            y_grid.lower()[0],
            y_grid.upper()[0]
        )));
    }
    let h = g.spacing(0);
    let n = g.len();
    let vals = u.values();
    let values = (0..y_grid.len())
        .map(|k| {
            let x = y_grid.center(k)[0] * s;
            let pos = ((x - lo) / h - 0.5).clamp(0.0, (n - 1) as f64);
            let i = (pos.floor() as usize).min(n.saturating_sub(2));
            let w = pos - i as f64;
            let interp = if n == 1 { vals[0] } else { (1.0 - w) * vals[i] + w * vals[i + 1] };
            s * interp
        })
        .collect();
    let mass = u.mass();
    Ok(RescaledSnapshot {
        density: DensityGrid::new(*y_grid, values)?,
        t,
        mass,
        c: mass / (2.0 * PI).sqrt(),
    })
}

/// Fundamental solution `N(0, 2κt)` at the cell centres, scaled to the
/// discrete mass of `u`.
pub fn fundamental_on_grid(u: &DensityGrid, t: f64, kappa: f64) -> Result<DensityGrid> {
    positive_time(t)?;
    one_dimensional(u)?;
    let mut g = DensityGrid::gaussian(*u.grid(), &[0.0], 2.0 * kappa * t)?;
    let m = u.mass();
    if m != 1.0 {
        g = DensityGrid::new(*g.grid(), g.values().iter().map(|v| v * m).collect())?;
    }
    Ok(g)
}

/// `∫u ln(u / fundamental)` with the fundamental solution at `t` carrying
/// the mass of `u`.
pub fn entropy_vs_fundamental(u: &DensityGrid, t: f64, kappa: f64) -> Result<f64> {
    let g = fundamental_on_grid(u, t, kappa)?;
    relative_entropy(u, &g, PhiFunction::Kl)
}

/// Diagnostics along a heat orbit.
#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    pub l1_to_gaussian: Vec<f64>,
    /// Fixed once from the initial mass.
    pub c: f64,
}

impl AsymptoticsReport {
    pub fn entropy_nonincreasing(&self, slack: f64) -> bool {
        self.entropy.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn entropy_strictly_decreasing(&self) -> bool {
        self.entropy.windows(2).all(|w| w[1] < w[0])
    }

    pub fn l1_nonincreasing(&self, slack: f64) -> bool {
        self.l1_to_gaussian.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn final_l1(&self) -> f64 {
        self.l1_to_gaussian.last().copied().unwrap_or(f64::NAN)
    }

    /// Columns `t,H_vs_fundamental,l1_to_gaussian`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,H_vs_fundamental,l1_to_gaussian")?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{}",
                fmt_f64(self.times[k]),
                fmt_f64(self.entropy[k]),
                fmt_f64(self.l1_to_gaussian[k])
            )?;
        }
        Ok(())
    }
}

/// Evolve `u0`, given at `t0`, under the heat flow of `spec` and record the
/// entropy against the fundamental solution and the L¹ distance of the
/// rescaled orbit to `C·exp(−y²/2)` at each of `t_list`.
///
/// With diffusivity κ the orbit is rescaled at heat time `2κt`, which is
/// `t` itself for κ = 1/2.
pub fn intermediate_asymptotics_run(
    u0: &DensityGrid,
    t0: f64,
    t_list: &[f64],
    spec: &ProblemSpec,
) -> Result<AsymptoticsReport> {
    positive_time(t0)?;
    one_dimensional(u0)?;
    let (a, b) = (spec.grid.lower()[0], spec.grid.upper()[0]);
    for k in 0..=8 {
        let x = [a + (b - a) * k as f64 / 8.0, 0.0];
        if spec.drift.eval(t0, &x)[0] != 0.0 {
            return Err(Error::Input("intermediate asymptotics needs a drift-free heat flow".into()));
        }
    }
    let kappa = spec.diffusion.kappa(t0);
    if t_list.windows(2).any(|w| w[1] <= w[0]) || t_list.first().is_some_and(|&t| t < t0) {
        return Err(Error::Input("output times must increase from t0".into()));
    }
    let c = u0.mass() / (2.0 * PI).sqrt();
    let later: Vec<f64> = t_list.iter().copied().filter(|&t| t > t0).collect();
    let mut states: Vec<(f64, DensityGrid)> = Vec::with_capacity(t_list.len());
    if later.len() < t_list.len() {
        states.push((t0, u0.clone()));
    }
    let evolved = evolve(u0, spec, t0, &later, AdvectionScheme::default())?;
    states.extend(later.into_iter().zip(evolved));

    let mut report = AsymptoticsReport {
        times: Vec::new(),
        entropy: Vec::new(),
        l1_to_gaussian: Vec::new(),
        c,
    };
    for (t, u) in states {
        let snap = rescale(&u, 2.0 * kappa * t)?;
        let l1 = snap.density.l1_distance(&DensityGrid::from_fn(*snap.density.grid(), |p| {
            c * (-0.5 * p[0] * p[0]).exp()
        })?)?;
        report.times.push(t);
        report.entropy.push(entropy_vs_fundamental(&u, t, kappa)?);
        report.l1_to_gaussian.push(l1);
    }
    Ok(report)
}

/// Heat flow with κ = 1/2 on `[−half, half]`.
pub fn heat_spec(half: f64, cells: usize, horizon: (f64, f64)) -> Result<ProblemSpec> {
    ProblemSpec::new(
        "heat",
        crate::model::DriftField::zero(1),
        crate::model::DiffusionSpec::constant(0.5),
        SpatialGrid::new_1d(-half, half, cells)?,
        horizon,
    )
}
