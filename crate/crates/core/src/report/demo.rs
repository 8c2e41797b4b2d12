//! Reference runs behind `ou-demo` and `heat-demo`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::asymptotics::{entropy_vs_fundamental, heat_spec, intermediate_asymptotics_run, rescale_onto, AsymptoticsReport};
use crate::closed_forms::{ou_alpha_limit, regime, write_alpha_curve};
use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::model::SpatialGrid;

use super::scenario::{CheckOutcome, ExitStatus, Summary};

/// `t_k = t_max·k/points`, `k = 1..=points`.
pub fn demo_times(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || points == 0 {
        return Err(Error::Config("need t_max > 0 and at least one point".into()));
    }
    Ok((1..=points).map(|k| t_max * k as f64 / points as f64).collect())
}

/// Write `t,alpha,regime` for `lambda` to `w`.
pub fn ou_demo(mut w: impl Write, lambda: f64, x: f64, y: f64, times: &[f64]) -> Result<()> {
    if !lambda.is_finite() || !x.is_finite() || !y.is_finite() {
        return Err(Error::Config("lambda, x and y must be finite".into()));
    }
    write_alpha_curve(&mut w, &[x], &[y], lambda, times)?;
    Ok(())
}

/// Write `ou_alpha.csv` for `lambda` and one `ou_alpha_<regime>.csv` per
/// regime at rates `|λ|`, `0`, `−|λ|` (`±1` when λ = 0), plus a summary
/// listing the limits.
pub fn ou_demo_files(out_dir: &Path, lambda: f64, x: f64, y: f64, times: &[f64]) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    ou_demo(BufWriter::new(File::create(out_dir.join("ou_alpha.csv"))?), lambda, x, y, times)?;
    let m = if lambda == 0.0 { 1.0 } else { lambda.abs() };
    let mut limits = String::new();
    for l in [m, 0.0, -m] {
        let name = format!("ou_alpha_{}.csv", regime(l));
        ou_demo(BufWriter::new(File::create(out_dir.join(&name))?), l, x, y, times)?;
        limits.push_str(&format!("[{}]\nlambda = {l:?}\nlimit = {:?}\nfile = \"{name}\"\n\n", regime(l), ou_alpha_limit(&[x], &[y], l)));
    }
    fs::write(out_dir.join("summary.toml"), limits)?;
    Ok(())
}

/// Two-bump data at `t0 = 1` run to `t = 50` under `∂ₜu = ½∂²ₓu`.
pub struct HeatDemo {
    pub report: AsymptoticsReport,
    /// `entropy_vs_fundamental` and `H(v | v∞)` on an interpolated y-grid,
    /// at the final time.
    pub identity: (f64, f64),
    pub l1_target: f64,
}

impl HeatDemo {
    pub const T0: f64 = 1.0;
    pub const TIMES: [f64; 10] = [1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 30.0, 50.0];

    pub fn initial(grid: SpatialGrid) -> Result<DensityGrid> {
        DensityGrid::gaussian_mixture(grid, &[(0.5, vec![-1.5], 0.3), (0.5, vec![1.5], 0.3)])
    }

    pub fn run() -> Result<Self> {
        let t_end = Self::TIMES[Self::TIMES.len() - 1];
        let spec = heat_spec(60.0, 1024, (Self::T0, t_end))?;
        let u0 = Self::initial(spec.grid)?;
        let report = intermediate_asymptotics_run(&u0, Self::T0, &Self::TIMES, &spec)?;
        let u_end = crate::fokker_planck::evolve(&u0, &spec, Self::T0, &[t_end], Default::default())?.remove(0);
        let direct = entropy_vs_fundamental(&u_end, t_end, 0.5)?;
        let y = SpatialGrid::new_1d(-8.0, 8.0, 1600)?;
        let rescaled = rescale_onto(&u_end, t_end, &y)?.entropy_to_limit()?;
        Ok(Self {
            report,
            identity: (direct, rescaled),
            l1_target: 0.05,
        })
    }

    pub fn checks(&self) -> Vec<CheckOutcome> {
        let r = &self.report;
        let worst_step = r
            .entropy
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        let (a, b) = self.identity;
        vec![
            CheckOutcome {
                name: "entropy_strictly_decreasing".into(),
                pass: r.entropy_strictly_decreasing(),
                worst_residual: worst_step,
                tolerance: 0.0,
                detail: "smallest H(t_k) - H(t_k+1)".into(),
            },
            CheckOutcome {
                name: "l1_to_gaussian".into(),
                pass: r.final_l1() <= self.l1_target,
                worst_residual: self.l1_target - r.final_l1(),
                tolerance: 0.0,
                detail: format!("final L1 {} against target {}", r.final_l1(), self.l1_target),
            },
            CheckOutcome {
                name: "change_of_variables".into(),
                pass: (a - b).abs() <= 1e-3,
                worst_residual: 1e-3 - (a - b).abs(),
                tolerance: 0.0,
                detail: format!("direct {a}, rescaled {b}"),
            },
        ]
    }

    pub fn status(&self) -> ExitStatus {
        if self.checks().iter().all(|c| c.pass) {
            ExitStatus::Pass
        } else {
            ExitStatus::Falsified
        }
    }

    /// `asymptotics.csv` and `summary.toml`.
    pub fn write_files(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir)?;
        self.report.write_csv(BufWriter::new(File::create(out_dir.join("asymptotics.csv"))?))?;
        let status = self.status();
        let summary = Summary {
            scenario: "heat-demo".into(),
            schema: super::config::SCHEMA_VERSION,
            seed: 0,
            status: status.label().into(),
            exit_code: status.code(),
            error: None,
            files: vec!["asymptotics.csv".into()],
            checks: self.checks(),
        };
        let text = toml::to_string(&summary).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(out_dir.join("summary.toml"), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_rate_curve_reaches_its_limit() {
        let times = demo_times(10.0, 20).unwrap();
        let mut out = Vec::new();
        ou_demo(&mut out, -1.0, 2.0, 0.0, &times).unwrap();
        let text = String::from_utf8(out).unwrap();
        let last = text.lines().last().unwrap();
        let alpha: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
        assert!((alpha - 2.0).abs() < 1e-3 * 4.0);
        assert!(last.ends_with("exponential_to_positive_limit"), "{last}");
    }

    #[test]
    fn demo_files() {
        let dir = tempfile::tempdir().unwrap();
        ou_demo_files(dir.path(), 0.0, 1.0, 0.0, &demo_times(1.0, 4).unwrap()).unwrap();
        let n = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(n, 5);
    }
}
