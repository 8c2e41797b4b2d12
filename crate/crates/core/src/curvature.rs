//! Carré du champ operators and the time-dependent curvature bound ρ(t).

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{sample_points, Mat2, Point, ProblemSpec};
use crate::report::csv::fmt_f64;
use crate::stencil;
use crate::testfn::TestFunction;

/// Lattice points per axis used for the supremum over space.
pub const LATTICE_PER_AXIS: usize = 64;

/// `Γ(t)(f) = κ(t)|∇f|²` per cell.
pub fn gamma(f: &[f64], t: f64, spec: &ProblemSpec) -> Vec<f64> {
    let kappa = spec.diffusion.kappa(t);
    let grads = stencil::gradient(f, &spec.grid);
    (0..f.len())
        .map(|k| kappa * grads.iter().map(|g| g[k] * g[k]).sum::<f64>())
        .collect()
}

/// `Γ₂(t)(f) = κ²‖Hess f‖² − κ ∇f·SJac(b)∇f` per cell.
pub fn gamma2(f: &[f64], t: f64, spec: &ProblemSpec) -> Vec<f64> {
    let grid = &spec.grid;
    let d = grid.dim();
    let kappa = spec.diffusion.kappa(t);
    let grads = stencil::gradient(f, grid);
    let hess = stencil::hessian(f, grid);
    (0..f.len())
        .map(|k| {
            let s = sjac(t, &grid.center(k), spec);
            let mut h2 = 0.0;
            let mut quad = 0.0;
            for i in 0..d {
                for j in 0..d {
                    h2 += hess[i][j][k].powi(2);
                    quad += grads[i][k] * s[i][j] * grads[j][k];
                }
            }
            kappa * kappa * h2 - kappa * quad
        })
        .collect()
}

/// `Γ₂ = ½[LΓ(f) − 2Γ(f, Lf)]` evaluated by nested finite differences.
/// Only accurate away from the boundary; used to validate [`gamma2`].
pub fn gamma2_by_definition(f: &[f64], t: f64, spec: &ProblemSpec) -> Vec<f64> {
    let grid = &spec.grid;
    let kappa = spec.diffusion.kappa(t);
    let generator = |g: &[f64]| -> Vec<f64> {
        let grads = stencil::gradient(g, grid);
        let lap: Vec<Vec<f64>> = (0..grid.dim()).map(|a| stencil::second_derivative(g, grid, a)).collect();
        (0..g.len())
            .map(|k| {
                let b = spec.drift.eval(t, &grid.center(k));
                (0..grid.dim()).map(|a| kappa * lap[a][k] + b[a] * grads[a][k]).sum()
            })
            .collect()
    };
    let gf = gamma(f, t, spec);
    let l_gamma = generator(&gf);
    let lf = generator(f);
    let df = stencil::gradient(f, grid);
    let dlf = stencil::gradient(&lf, grid);
    (0..f.len())
        .map(|k| {
            let cross: f64 = (0..grid.dim()).map(|a| df[a][k] * dlf[a][k]).sum();
            0.5 * l_gamma[k] - kappa * cross
        })
        .collect()
}

/// Symmetric part of the drift Jacobian at `(t, x)`.
pub fn sjac(t: f64, x: &Point, spec: &ProblemSpec) -> Mat2 {
    let j = spec.drift.jacobian(t, x);
    let mut s = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            s[a][b] = 0.5 * (j[a][b] + j[b][a]);
        }
    }
    s
}

/// Largest eigenvalue of a symmetric matrix of dimension `dim`.
pub fn lambda_max(s: &Mat2, dim: usize) -> f64 {
    if dim == 1 {
        return s[0][0];
    }
    let mid = 0.5 * (s[0][0] + s[1][1]);
    let half = 0.5 * (s[0][0] - s[1][1]);
    mid + half.hypot(s[0][1])
}

/// How a profile was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMethod {
    Analytic,
    SjacGridInf,
}

impl fmt::Display for RhoMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::SjacGridInf => "sjac_grid_inf",
        })
    }
}

/// Sampled ρ(t), linearly interpolated between sample times and held
/// constant beyond the end points.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    times: Vec<f64>,
    values: Vec<f64>,
    method: RhoMethod,
    maximizers: Vec<Point>,
}

impl CurvatureProfile {
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>, method: RhoMethod) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::Input("a profile needs at least two (t, rho) samples".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Input("profile times must increase strictly".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite rho value {v}")));
        }
        let n = times.len();
        Ok(Self {
            times,
            values,
            method,
            maximizers: vec![[f64::NAN; 2]; n],
        })
    }

    pub fn constant(rho: f64, horizon: (f64, f64)) -> Result<Self> {
        Self::from_samples(vec![horizon.0, horizon.1], vec![rho, rho], RhoMethod::Analytic)
    }

    /// Sample a known ρ(t) at `samples` equally spaced times.
    pub fn from_fn(rho: impl Fn(f64) -> f64, horizon: (f64, f64), samples: usize) -> Result<Self> {
        let n = samples.max(2);
        let times: Vec<f64> = (0..n)
            .map(|k| horizon.0 + (horizon.1 - horizon.0) * k as f64 / (n - 1) as f64)
            .collect();
        let values = times.iter().map(|&t| rho(t)).collect();
        Self::from_samples(times, values, RhoMethod::Analytic)
    }

    pub fn rho(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> RhoMethod {
        self.method
    }

    /// Point attaining the spatial supremum at each sample time (NaN for
    /// analytic profiles).
    pub fn maximizers(&self) -> &[Point] {
        &self.maximizers
    }

    pub fn horizon(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn covers(&self, s: f64, t: f64) -> bool {
        let (a, b) = self.horizon();
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        s >= a - slack && t <= b + slack
    }

    /// The same profile moved up by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut p = self.clone();
        p.values.iter_mut().for_each(|v| *v += delta);
        p
    }

    /// `Some(ρ₀)` when every sample equals ρ₀.
    pub fn constant_value(&self) -> Option<f64> {
        let v0 = self.values[0];
        self.values.iter().all(|&v| v == v0).then_some(v0)
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,rho")?;
        for (t, r) in self.times.iter().zip(&self.values) {
            writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*r))?;
        }
        Ok(())
    }
}

fn lattice(spec: &ProblemSpec) -> Vec<Point> {
    let g = &spec.grid;
    let axis = |a: usize| -> Vec<f64> {
        (0..LATTICE_PER_AXIS)
            .map(|i| g.lower()[a] + (g.upper()[a] - g.lower()[a]) * i as f64 / (LATTICE_PER_AXIS - 1) as f64)
            .collect()
    };
    let xs = axis(0);
    if g.dim() == 1 {
        xs.into_iter().map(|x| [x, 0.0]).collect()
    } else {
        let ys = axis(1);
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect()
    }
}

/// `ρ(t) = κ̇/(2κ) − sup_x λ_max(SJac b(t, x))` at `samples` equally spaced
/// times, the supremum taken over a lattice that includes the box corners.
pub fn estimate_rho(spec: &ProblemSpec, samples: usize) -> Result<CurvatureProfile> {
    if samples < 16 {
        return Err(Error::Input(format!("estimate_rho needs at least 16 samples, got {samples}")));
    }
    let (t0, t1) = spec.horizon;
    let points = lattice(spec);
    let times: Vec<f64> = (0..samples)
        .map(|k| t0 + (t1 - t0) * k as f64 / (samples - 1) as f64)
        .collect();
    let rows: Vec<(f64, Point)> = times
        .par_iter()
        .map(|&t| {
            let mut best = f64::NEG_INFINITY;
            let mut arg = points[0];
            for x in &points {
                let l = lambda_max(&sjac(t, x, spec), spec.dim());
                if !l.is_finite() {
                    return Err(Error::Evaluation {
                        what: "largest eigenvalue of SJac(b)".into(),
                        t,
                        x: *x,
                    });
                }
                if l > best {
                    best = l;
                    arg = *x;
                }
            }
            let kappa = spec.diffusion.kappa(t);
            Ok((0.5 * spec.diffusion.kappa_dot(t) / kappa - best, arg))
        })
        .collect::<Result<_>>()?;
    let mut profile = CurvatureProfile::from_samples(
        times,
        rows.iter().map(|r| r.0).collect(),
        RhoMethod::SjacGridInf,
    )?;
    profile.maximizers = rows.iter().map(|r| r.1).collect();
    Ok(profile)
}

/// Outcome of [`verify_criterion`].
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    /// Smallest `Γ₂ + ½∂ₜΓ − ρΓ` seen.
    pub worst_residual: f64,
    /// Tolerance of the trial holding the worst residual.
    pub tolerance: f64,
    pub witness_trial: usize,
    pub witness_t: f64,
    pub witness_x: Point,
    pub trials: usize,
    pub pass: bool,
}

/// Evaluate `Γ₂ + ½κ̇|∇f|² − ρ(t)Γ(f)` over the grid for random test
/// functions at quasi-random times. A trial fails when its minimum drops
/// below `−1e-5·(1 + max|f|)`.
pub fn verify_criterion(
    profile: &CurvatureProfile,
    spec: &ProblemSpec,
    trials: usize,
    seed: u64,
) -> Result<CriterionReport> {
    if trials == 0 {
        return Err(Error::Input("verify_criterion needs at least one trial".into()));
    }
    let times = sample_points(spec, trials, seed);
    let grid = spec.grid;
    let results: Vec<(f64, f64, usize, f64, Point, bool)> = (0..trials)
        .into_par_iter()
        .map(|id| {
            let t = times[id].0;
            let f = if id == 0 {
                TestFunction::affine(0.0, [1.0, 0.5])
            } else {
                TestFunction::random(&grid, seed, id)
            }
            .on_grid(&grid);
            let tol = 1e-5 * (1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let g1 = gamma(&f, t, spec);
            let g2 = gamma2(&f, t, spec);
            let kappa = spec.diffusion.kappa(t);
            let kdot = spec.diffusion.kappa_dot(t);
            let rho = profile.rho(t);
            let (mut worst, mut at) = (f64::INFINITY, 0);
            for k in 0..f.len() {
                // ∂ₜΓ = κ̇|∇f|² = (κ̇/κ)Γ
                let r = g2[k] + 0.5 * kdot / kappa * g1[k] - rho * g1[k];
                if r < worst {
                    worst = r;
                    at = k;
                }
            }
            (worst, tol, id, t, grid.center(at), worst >= -tol)
        })
        .collect();
    let worst = results
        .iter()
        .min_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)))
        .unwrap();
    Ok(CriterionReport {
        worst_residual: worst.0,
        tolerance: worst.1,
        witness_trial: worst.2,
        witness_t: worst.3,
        witness_x: worst.4,
        trials,
        pass: results.iter().all(|r| r.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, time_varying_ou, DiffusionSpec, DriftField, Preset, SpatialGrid};
    use approx::assert_relative_eq;

    fn ou1() -> ProblemSpec {
        preset(Preset::Ou { lambda: 1.0 }).unwrap()
    }

    fn grid_fn(spec: &ProblemSpec, f: impl Fn(&Point) -> f64) -> Vec<f64> {
        spec.grid.centers().iter().map(f).collect()
    }

    #[test]
    fn gamma_examples() {
        let spec = ou1();
        assert!(gamma(&grid_fn(&spec, |_| 3.0), 0.0, &spec).iter().all(|&v| v == 0.0));
        let g = gamma(&grid_fn(&spec, |p| p[0]), 0.0, &spec);
        assert!(g.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let k2 = spec.clone().with_diffusion(DiffusionSpec::constant(2.0)).unwrap();
        let g = gamma(&grid_fn(&k2, |p| p[0]), 0.0, &k2);
        assert!(g.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn gamma2_on_quadratic_matches_hand_computation() {
        let spec = ou1();
        let g2 = gamma2(&grid_fn(&spec, |p| 0.5 * p[0] * p[0]), 0.0, &spec);
        for (k, p) in spec.grid.centers().iter().enumerate() {
            assert_relative_eq!(g2[k], 1.0 + p[0] * p[0], max_relative = 1e-6);
        }
        let heat = preset(Preset::Heat).unwrap();
        let g2 = gamma2(&grid_fn(&heat, |p| 2.0 - 0.3 * p[0]), 1.0, &heat);
        assert!(g2.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rotation_does_not_contribute() {
        let rot = preset(Preset::RotatingDrift).unwrap();
        let sym = ProblemSpec::new(
            "sym",
            DriftField::linear(2, |_| [[-1.0, 0.0], [0.0, -1.0]]),
            DiffusionSpec::constant(1.0),
            rot.grid,
            rot.horizon,
        )
        .unwrap();
        for id in 0..5 {
            let f = TestFunction::random(&rot.grid, 11, id).on_grid(&rot.grid);
            let a = gamma2(&f, 0.5, &rot);
            let b = gamma2(&f, 0.5, &sym);
            for k in 0..f.len() {
                assert!((a[k] - b[k]).abs() <= 1e-12 * (1.0 + a[k].abs()));
            }
        }
    }

    #[test]
    fn gamma2_agrees_with_defining_identity() {
        // time-dependent κ and a nonlinear drift on a fine grid
        let grid = SpatialGrid::new_2d([-3.0, -3.0], [3.0, 3.0], [160, 160]).unwrap();
        let spec = ProblemSpec::new(
            "nonlinear",
            DriftField::new(2, |t, x| [-x[0] - 0.2 * x[0].powi(3) + t * x[1], 0.5 * x[0] * x[1].sin() - x[1]]),
            DiffusionSpec::new(|t| 1.0 + 0.5 * t),
            grid,
            (0.0, 1.0),
        )
        .unwrap();
        let f = TestFunction::affine(0.2, [0.4, -0.3])
            .with_bump(1.0, [0.3, -0.2], 0.8)
            .with_bump(-0.7, [-0.5, 0.6], 1.1)
            .on_grid(&grid);
        let direct = gamma2(&f, 0.6, &spec);
        let by_def = gamma2_by_definition(&f, 0.6, &spec);
        let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..grid.len() {
            if grid.is_interior(k, 0.6) {
                assert!((direct[k] - by_def[k]).abs() <= 1e-3 * scale, "cell {k}");
            }
        }
    }

    #[test]
    fn sjac_examples() {
        let s = sjac(0.0, &[1.0, 2.0], &preset(Preset::RotatingDrift).unwrap());
        assert_eq!(s, [[-1.0, 0.0], [0.0, -1.0]]);
        let s = sjac(0.0, &[0.3, 0.0], &preset(Preset::Ou { lambda: 2.5 }).unwrap());
        assert_eq!(s[0][0], -2.5);
        let c = ProblemSpec::new(
            "const",
            DriftField::new(1, |_, _| [0.7, 0.0]),
            DiffusionSpec::constant(1.0),
            SpatialGrid::new_1d(-1.0, 1.0, 16).unwrap(),
            (0.0, 1.0),
        )
        .unwrap();
        assert_eq!(sjac(0.0, &[0.2, 0.0], &c)[0][0], 0.0);
    }

    #[test]
    fn estimates_for_presets() {
        let p = estimate_rho(&ou1(), 16).unwrap();
        assert!(p.values().iter().all(|&r| r == 1.0));
        assert_eq!(p.method(), RhoMethod::SjacGridInf);
        let p = estimate_rho(&preset(Preset::RotatingDrift).unwrap(), 16).unwrap();
        assert!(p.values().iter().all(|&r| (r - 1.0).abs() < 1e-15));
        let tv = time_varying_ou(|t| 1.0 + t, (0.0, 2.0)).unwrap();
        let p = estimate_rho(&tv, 17).unwrap();
        for (t, r) in p.times().iter().zip(p.values()) {
            assert!((r - (1.0 + t)).abs() < 1e-15);
        }
        assert_relative_eq!(p.rho(0.3), 1.3, epsilon = 1e-14);
        assert!(estimate_rho(&ou1(), 15).is_err());
    }

    #[test]
    fn time_dependent_kappa_enters_rho() {
        let spec = ProblemSpec::new(
            "growing",
            DriftField::zero(1),
            DiffusionSpec::new(|t| (0.5 * t).exp()),
            SpatialGrid::new_1d(-1.0, 1.0, 16).unwrap(),
            (0.0, 1.0),
        )
        .unwrap();
        let p = estimate_rho(&spec, 16).unwrap();
        assert!(p.values().iter().all(|r| (r - 0.25).abs() < 1e-8));
    }

    #[test]
    fn antisymmetric_part_is_ignored() {
        let m = [[-0.3, 2.0], [-1.2, -0.8]];
        let base = preset(Preset::RotatingDrift).unwrap();
        let full = ProblemSpec::new("m", DriftField::linear(2, move |_| m), DiffusionSpec::constant(1.0), base.grid, base.horizon).unwrap();
        let s = 0.5 * (m[0][1] + m[1][0]);
        let symm = [[m[0][0], s], [s, m[1][1]]];
        let half = ProblemSpec::new("s", DriftField::linear(2, move |_| symm), DiffusionSpec::constant(1.0), base.grid, base.horizon).unwrap();
        let a = estimate_rho(&full, 16).unwrap();
        let b = estimate_rho(&half, 16).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn criterion_holds_and_can_be_falsified() {
        let spec = ou1();
        let good = estimate_rho(&spec, 16).unwrap();
        let r = verify_criterion(&good, &spec, 20, 5).unwrap();
        assert!(r.pass && r.worst_residual >= -1e-6, "{r:?}");
        let bad = CurvatureProfile::constant(2.0, spec.horizon).unwrap();
        let r = verify_criterion(&bad, &spec, 20, 5).unwrap();
        assert!(!r.pass && r.worst_residual < 0.0);
        let heat = preset(Preset::Heat).unwrap();
        let zero = CurvatureProfile::constant(0.0, heat.horizon).unwrap();
        assert!(verify_criterion(&zero, &heat, 10, 1).unwrap().pass);
    }

    #[test]
    fn profile_interpolation_and_csv() {
        let p = CurvatureProfile::from_samples(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 0.0], RhoMethod::Analytic).unwrap();
        assert_eq!(p.rho(0.5), 1.5);
        assert_eq!(p.rho(2.0), 1.0);
        assert_eq!(p.rho(5.0), 0.0);
        assert_eq!(p.constant_value(), None);
        assert_eq!(p.shifted(0.5).rho(0.0), 1.5);
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 4);
        assert!(CurvatureProfile::from_samples(vec![0.0, 0.0], vec![1.0, 1.0], RhoMethod::Analytic).is_err());
    }
}
