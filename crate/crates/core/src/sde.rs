//! Euler–Maruyama simulation of `dX = b(t, X)dt + √(2κ(t)) dB`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::model::{Point, ProblemSpec, SpatialGrid};
use crate::report::csv::fmt_f64;

/// Law of the starting point.
#[derive(Debug, Clone)]
pub enum StartLaw {
    Dirac(Point),
    Gaussian { mean: Point, variance: f64 },
    /// Cell chosen with probability proportional to its mass, then a
    /// uniform point inside the cell.
    Density(DensityGrid),
}

impl StartLaw {
    fn describe(&self) -> String {
        match self {
            Self::Dirac(x) => format!("dirac({}, {})", x[0], x[1]),
            Self::Gaussian { mean, variance } => format!("gaussian({}, {}; {variance})", mean[0], mean[1]),
            Self::Density(d) => format!("density({} cells)", d.grid().len()),
        }
    }
}

/// Standard normals by Box–Muller, both variates used.
struct Normals {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Normals {
    fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        Self { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * sin);
        r * cos
    }
}

/// Terminal positions of independent paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub dim: usize,
    pub positions: Vec<Point>,
    pub seed: u64,
    /// Step actually used (the horizon split into equal steps).
    pub dt: f64,
    pub steps: usize,
    pub start: String,
    pub r: f64,
    pub t: f64,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> Point {
        let n = self.len() as f64;
        let mut m = [0.0; 2];
        for p in &self.positions {
            m[0] += p[0] / n;
            m[1] += p[1] / n;
        }
        m
    }

    /// Unbiased sample variance per axis.
    pub fn variance(&self) -> Point {
        let m = self.mean();
        let n = self.len() as f64;
        let mut v = [0.0; 2];
        for p in &self.positions {
            v[0] += (p[0] - m[0]).powi(2);
            v[1] += (p[1] - m[1]).powi(2);
        }
        let denom = (n - 1.0).max(1.0);
        [v[0] / denom, v[1] / denom]
    }

    /// Standard error of the mean per axis.
    pub fn mean_stderr(&self) -> Point {
        let v = self.variance();
        let n = self.len() as f64;
        [(v[0] / n).sqrt(), (v[1] / n).sqrt()]
    }

    /// Columns `path_id, x1[, x2]`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        if self.dim == 1 {
            writeln!(w, "path_id,x1")?;
        } else {
            writeln!(w, "path_id,x1,x2")?;
        }
        for (i, p) in self.positions.iter().enumerate() {
            if self.dim == 1 {
                writeln!(w, "{i},{}", fmt_f64(p[0]))?;
            } else {
                writeln!(w, "{i},{},{}", fmt_f64(p[0]), fmt_f64(p[1]))?;
            }
        }
        Ok(())
    }
}

fn draw_start(start: &StartLaw, cdf: &[f64], dim: usize, z: &mut Normals, rng_u: &mut impl FnMut() -> f64) -> Point {
    match start {
        StartLaw::Dirac(x) => *x,
        StartLaw::Gaussian { mean, variance } => {
            let sd = variance.sqrt();
            let mut x = *mean;
            for c in x.iter_mut().take(dim) {
                *c += sd * z.next();
            }
            x
        }
        StartLaw::Density(d) => {
            let u = rng_u() * cdf[cdf.len() - 1];
            let k = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
            let g = d.grid();
            let mut x = g.center(k);
            for (a, c) in x.iter_mut().enumerate().take(dim) {
                *c += (rng_u() - 0.5) * g.spacing(a);
            }
            x
        }
    }
}

/// Simulate `count` paths from time `r` to `t` with steps no larger than
/// `dt`. Path `i` draws its variates from its own stream of a generator
/// keyed by `seed`, so results do not depend on scheduling.
pub fn simulate(
    spec: &ProblemSpec,
    start: &StartLaw,
    r: f64,
    t: f64,
    count: usize,
    dt: f64,
    seed: u64,
) -> Result<PathEnsemble> {
    if !(dt > 0.0) || count == 0 || !(r <= t) {
        return Err(Error::Input(format!(
            "need dt > 0, count >= 1 and r <= t; got dt = {dt}, count = {count}, r = {r}, t = {t}"
        )));
    }
    let dim = spec.dim();
    let cdf: Vec<f64> = match start {
        StartLaw::Density(d) => {
            if d.grid().dim() != dim {
                return Err(Error::Input("start density has the wrong dimension".into()));
            }
            d.values()
                .iter()
                .scan(0.0, |acc, v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect()
        }
        _ => Vec::new(),
    };
    let steps = ((t - r) / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { (t - r) / steps as f64 };
    let positions = (0..count)
        .into_par_iter()
        .map(|path| {
            let mut z = Normals::new(seed, path as u64);
            let mut uniform = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
            uniform.set_stream(path as u64);
            let mut u = || uniform.random::<f64>();
            let mut x = draw_start(start, &cdf, dim, &mut z, &mut u);
            for k in 0..steps {
                let tk = r + k as f64 * h;
                let b = spec.drift.eval(tk, &x);
                let amp = (2.0 * spec.diffusion.kappa(tk) * h).sqrt();
                for a in 0..dim {
                    x[a] += b[a] * h + amp * z.next();
                }
                if !(x[0].is_finite() && x[1].is_finite()) {
                    return Err(Error::Divergence {
                        step: k,
                        t: tk,
                        what: format!("path {path} left the finite range"),
                    });
                }
            }
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PathEnsemble {
        dim,
        positions,
        seed,
        dt: h,
        steps,
        start: start.describe(),
        r,
        t,
    })
}

/// Histogram of an ensemble on a grid.
#[derive(Debug, Clone)]
pub struct EmpiricalDensity {
    /// Unit mass over the counted samples.
    pub density: DensityGrid,
    pub outside: usize,
    /// More than 0.1% of the samples fell outside the box.
    pub coverage_warning: bool,
}

pub fn empirical_density(ensemble: &PathEnsemble, grid: &SpatialGrid) -> Result<EmpiricalDensity> {
    if grid.dim() != ensemble.dim {
        return Err(Error::Input("grid and ensemble dimensions differ".into()));
    }
    let mut counts = vec![0.0; grid.len()];
    let mut outside = 0;
    for p in &ensemble.positions {
        match grid.locate(p) {
            Some(k) => counts[k] += 1.0,
            None => outside += 1,
        }
    }
    let inside = ensemble.len() - outside;
    if inside == 0 {
        return Err(Error::Coverage("no sample fell inside the grid".into()));
    }
    let w = 1.0 / (inside as f64 * grid.cell_volume());
    counts.iter_mut().for_each(|c| *c *= w);
    Ok(EmpiricalDensity {
        density: DensityGrid::new(*grid, counts)?,
        outside,
        coverage_warning: outside as f64 > 1e-3 * ensemble.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, DiffusionSpec, DriftField, Preset};

    #[test]
    fn frozen_paths_stay_put() {
        let grid = SpatialGrid::new_1d(-1.0, 1.0, 16).unwrap();
        let spec = ProblemSpec::new("still", DriftField::zero(1), DiffusionSpec::constant(1e-12), grid, (0.0, 1.0)).unwrap();
        let e = simulate(&spec, &StartLaw::Dirac([0.3, 0.0]), 0.0, 1.0, 100, 0.01, 1).unwrap();
        assert!(e.positions.iter().all(|p| (p[0] - 0.3).abs() < 1e-4));
    }

    #[test]
    fn ou_moments() {
        let spec = preset(Preset::Ou { lambda: 1.0 }).unwrap();
        let e = simulate(&spec, &StartLaw::Dirac([2.0, 0.0]), 0.0, 1.0, 20_000, 1e-3, 4).unwrap();
        let m = e.mean()[0];
        let se = e.mean_stderr()[0];
        assert!((m - 2.0 * (-1.0f64).exp()).abs() <= 3.0 * se);
        let v = e.variance()[0];
        let want = 1.0 - (-2.0f64).exp();
        // stderr of a Gaussian sample variance: v·√(2/(n−1))
        assert!((v - want).abs() <= 3.0 * want * (2.0 / 19_999.0f64).sqrt());
    }

    #[test]
    fn seeds_are_deterministic() {
        let spec = preset(Preset::RotatingDrift).unwrap();
        let start = StartLaw::Gaussian { mean: [1.0, 0.0], variance: 0.1 };
        let a = simulate(&spec, &start, 0.0, 0.3, 200, 0.01, 9).unwrap();
        let b = simulate(&spec, &start, 0.0, 0.3, 200, 0.01, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate(&spec, &start, 0.0, 0.3, 200, 0.01, 10).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn histogram_examples() {
        let grid = SpatialGrid::new_1d(-1.0, 1.0, 8).unwrap();
        let spec = ProblemSpec::new("still", DriftField::zero(1), DiffusionSpec::constant(1e-12), grid, (0.0, 1.0)).unwrap();
        let one = simulate(&spec, &StartLaw::Dirac([0.1, 0.0]), 0.0, 0.0, 1, 0.1, 0).unwrap();
        let h = empirical_density(&one, &grid).unwrap();
        assert_eq!(h.density.values().iter().filter(|&&v| v > 0.0).count(), 1);
        assert!((h.density.mass() - 1.0).abs() < 1e-15);

        let wide = simulate(&spec, &StartLaw::Gaussian { mean: [0.0, 0.0], variance: 1.0 }, 0.0, 0.0, 1000, 0.1, 0).unwrap();
        let h = empirical_density(&wide, &grid).unwrap();
        assert!(h.outside > 0 && h.coverage_warning);
        assert!((h.density.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn start_from_density() {
        let spec = preset(Preset::Heat).unwrap();
        let d = DensityGrid::gaussian(spec.grid, &[1.0], 0.5).unwrap();
        let e = simulate(&spec, &StartLaw::Density(d), 0.0, 0.0, 20_000, 0.1, 2).unwrap();
        assert!((e.mean()[0] - 1.0).abs() < 0.03);
        assert!((e.variance()[0] - 0.5).abs() < 0.03);
    }

    #[test]
    fn terminal_dump() {
        let spec = preset(Preset::RotatingDrift).unwrap();
        let e = simulate(&spec, &StartLaw::Dirac([0.0, 0.0]), 0.0, 0.1, 3, 0.05, 0).unwrap();
        let mut out = Vec::new();
        e.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("path_id,x1,x2\n0,"));
        assert_eq!(text.lines().count(), 4);
    }
}
