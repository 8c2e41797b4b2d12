//! Coefficient fields, the spatial grid and the preset problems.
//!
//! Every problem is of the form `∂ₜu + div(b u − κ ∇u) = 0` with a drift
//! field `b(t, x)` and a scalar diffusion `κ(t)`, i.e. the generator is
//! `Lₜ = κ(t) Δ + b(t, ·)·∇`. Points and matrices are stored in fixed
//! two-component arrays; in one dimension the second component is unused
//! and kept at zero.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 2;

/// Default cap on the total number of grid cells.
pub const DEFAULT_CELL_CAP: usize = 1 << 22;

pub type Point = [f64; MAX_DIM];
pub type Mat2 = [[f64; MAX_DIM]; MAX_DIM];

type DriftFn = dyn Fn(f64, &Point) -> Point + Send + Sync;
type JacobianFn = dyn Fn(f64, &Point) -> Mat2 + Send + Sync;
type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// The drift `b(t, x)`, optionally with an analytic Jacobian.
#[derive(Clone)]
pub struct DriftField {
    dim: usize,
    eval: Arc<DriftFn>,
    jacobian: Option<Arc<JacobianFn>>,
}

impl DriftField {
    pub fn new(dim: usize, eval: impl Fn(f64, &Point) -> Point + Send + Sync + 'static) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension must be 1 or 2");
        Self {
            dim,
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(f64, &Point) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, |_, _| [0.0; MAX_DIM]).with_jacobian(|_, _| [[0.0; MAX_DIM]; MAX_DIM])
    }

    /// `b(t, x) = M(t) x`.
    pub fn linear(dim: usize, matrix: impl Fn(f64) -> Mat2 + Send + Sync + 'static) -> Self {
        let matrix = Arc::new(matrix);
        let m = Arc::clone(&matrix);
        let mut field = Self::new(dim, move |t, x| {
            let a = m(t);
            let mut out = [0.0; MAX_DIM];
            for i in 0..dim {
                for j in 0..dim {
                    out[i] += a[i][j] * x[j];
                }
            }
            out
        });
        field.jacobian = Some(Arc::new(move |t, _| {
            let mut a = matrix(t);
            for (i, row) in a.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    if i >= dim || j >= dim {
                        *v = 0.0;
                    }
                }
            }
            a
        }));
        field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, t: f64, x: &Point) -> Point {
        (self.eval)(t, x)
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Analytic Jacobian when supplied, central finite differences otherwise.
    /// Entry `[i][j]` is `∂b_i/∂x_j`.
    pub fn jacobian(&self, t: f64, x: &Point) -> Mat2 {
        match &self.jacobian {
            Some(j) => j(t, x),
            None => self.fd_jacobian(t, x),
        }
    }

    /// Central differences with step `max(1e-5, 1e-5·|x_j|)` per component.
    pub fn fd_jacobian(&self, t: f64, x: &Point) -> Mat2 {
        let mut jac = [[0.0; MAX_DIM]; MAX_DIM];
        for j in 0..self.dim {
            let h = (1e-5 * x[j].abs()).max(1e-5);
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            let bp = self.eval(t, &xp);
            let bm = self.eval(t, &xm);
            for i in 0..self.dim {
                jac[i][j] = (bp[i] - bm[i]) / (2.0 * h);
            }
        }
        jac
    }
}

impl fmt::Debug for DriftField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftField")
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

/// Scalar diffusion `κ(t)`; the diffusion matrix is `κ(t)·Id`.
#[derive(Clone)]
pub struct DiffusionSpec {
    kappa: Arc<ScalarFn>,
    kappa_dot: Option<Arc<ScalarFn>>,
}

impl DiffusionSpec {
    pub fn constant(kappa: f64) -> Self {
        Self {
            kappa: Arc::new(move |_| kappa),
            kappa_dot: Some(Arc::new(|_| 0.0)),
        }
    }

    pub fn new(kappa: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kappa: Arc::new(kappa),
            kappa_dot: None,
        }
    }

    pub fn with_derivative(mut self, kappa_dot: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.kappa_dot = Some(Arc::new(kappa_dot));
        self
    }

    #[inline]
    pub fn kappa(&self, t: f64) -> f64 {
        (self.kappa)(t)
    }

    pub fn kappa_dot(&self, t: f64) -> f64 {
        match &self.kappa_dot {
            Some(d) => d(t),
            None => {
                let h = 1e-6 * t.abs().max(1.0);
                (self.kappa(t + h) - self.kappa(t - h)) / (2.0 * h)
            }
        }
    }
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("kappa(0)", &self.kappa(0.0))
            .finish()
    }
}

/// Uniform cell-centred grid on a box in one or two dimensions.
///
/// Cells are stored row-major with axis 0 varying slowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    dim: usize,
    lower: Point,
    upper: Point,
    cells: [usize; MAX_DIM],
}

impl SpatialGrid {
    pub fn new_1d(lower: f64, upper: f64, cells: usize) -> Result<Self> {
        Self::new(1, [lower, 0.0], [upper, 1.0], [cells, 1], DEFAULT_CELL_CAP)
    }

    pub fn new_2d(lower: Point, upper: Point, cells: [usize; 2]) -> Result<Self> {
        Self::new(2, lower, upper, cells, DEFAULT_CELL_CAP)
    }

    pub fn new(
        dim: usize,
        lower: Point,
        upper: Point,
        cells: [usize; MAX_DIM],
        cap: usize,
    ) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Config(format!("unsupported dimension {dim}")));
        }
        let mut cells = cells;
        let mut lower = lower;
        let mut upper = upper;
        for axis in 0..dim {
            if cells[axis] < 8 {
                return Err(Error::Config(format!(
                    "axis {axis} needs at least 8 cells, got {}",
                    cells[axis]
                )));
            }
            if !(upper[axis] > lower[axis]) || !lower[axis].is_finite() || !upper[axis].is_finite()
            {
                return Err(Error::Config(format!(
                    "axis {axis} has invalid bounds [{}, {}]",
                    lower[axis], upper[axis]
                )));
            }
        }
        for axis in dim..MAX_DIM {
            cells[axis] = 1;
            lower[axis] = 0.0;
            upper[axis] = 1.0;
        }
        let total: usize = cells.iter().product();
        if total > cap {
            return Err(Error::Config(format!(
                "grid has {total} cells, above the cap of {cap}"
            )));
        }
        Ok(Self {
            dim,
            lower,
            upper,
            cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn cells(&self) -> [usize; MAX_DIM] {
        self.cells
    }

    pub fn cells_along(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Distance between consecutive entries along `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            self.cells[1]
        } else {
            1
        }
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize) -> usize {
        i * self.cells[1] + j
    }

    #[inline]
    pub fn unflat(&self, k: usize) -> [usize; MAX_DIM] {
        [k / self.cells[1], k % self.cells[1]]
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i as f64 + 0.5) * self.spacing(axis)
    }

    pub fn center(&self, k: usize) -> Point {
        let idx = self.unflat(k);
        let mut p = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            p[axis] = self.coord(axis, idx[axis]);
        }
        p
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.len()).map(|k| self.center(k)).collect()
    }

    /// Index of the cell containing `x`, if any.
    pub fn locate(&self, x: &Point) -> Option<usize> {
        let mut idx = [0usize; MAX_DIM];
        for axis in 0..self.dim {
            let s = (x[axis] - self.lower[axis]) / self.spacing(axis);
            if !(s >= 0.0) || s >= self.cells[axis] as f64 {
                return None;
            }
            idx[axis] = s as usize;
        }
        Some(self.flat(idx[0], idx[1]))
    }

    /// Whether cell `k` lies in the central `fraction` of the box on every axis.
    pub fn is_interior(&self, k: usize, fraction: f64) -> bool {
        let p = self.center(k);
        (0..self.dim).all(|a| {
            let mid = 0.5 * (self.lower[a] + self.upper[a]);
            let half = 0.5 * (self.upper[a] - self.lower[a]) * fraction;
            (p[a] - mid).abs() <= half
        })
    }

    /// Merge blocks of `factor` cells per axis into one.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let mut cells = self.cells;
        for axis in 0..self.dim {
            if factor == 0 || !cells[axis].is_multiple_of(factor) {
                return Err(Error::Input(format!(
                    "cannot coarsen {} cells by {factor}",
                    cells[axis]
                )));
            }
            cells[axis] /= factor;
        }
        Self::new(self.dim, self.lower, self.upper, cells, DEFAULT_CELL_CAP)
    }
}

/// Coefficients, discretisation and time horizon of one problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub drift: DriftField,
    pub diffusion: DiffusionSpec,
    pub grid: SpatialGrid,
    pub horizon: (f64, f64),
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        drift: DriftField,
        diffusion: DiffusionSpec,
        grid: SpatialGrid,
        horizon: (f64, f64),
    ) -> Result<Self> {
        if drift.dim() != grid.dim() {
            return Err(Error::Config(format!(
                "drift is {}-dimensional but the grid is {}-dimensional",
                drift.dim(),
                grid.dim()
            )));
        }
        if !(horizon.0 < horizon.1) || !horizon.0.is_finite() || !horizon.1.is_finite() {
            return Err(Error::Config(format!(
                "horizon [{}, {}] is empty",
                horizon.0, horizon.1
            )));
        }
        for k in 0..=16 {
            let t = horizon.0 + (horizon.1 - horizon.0) * k as f64 / 16.0;
            let kappa = diffusion.kappa(t);
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(Error::Config(format!("kappa({t}) = {kappa} is not positive")));
            }
        }
        Ok(Self {
            name: name.into(),
            drift,
            diffusion,
            grid,
            horizon,
        })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn with_grid(mut self, grid: SpatialGrid) -> Result<Self> {
        if grid.dim() != self.drift.dim() {
            return Err(Error::Config("grid dimension does not match the drift".into()));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn with_horizon(self, horizon: (f64, f64)) -> Result<Self> {
        Self::new(self.name, self.drift, self.diffusion, self.grid, horizon)
    }

    pub fn with_diffusion(self, diffusion: DiffusionSpec) -> Result<Self> {
        Self::new(self.name, self.drift, diffusion, self.grid, self.horizon)
    }

    /// Largest |b_axis| over the cell faces at time `t`.
    pub fn max_face_drift(&self, t: f64) -> f64 {
        let g = &self.grid;
        let mut max = 0.0f64;
        for axis in 0..g.dim() {
            let h = g.spacing(axis);
            for k in 0..g.len() {
                let mut p = g.center(k);
                p[axis] += 0.5 * h;
                max = max.max(self.drift.eval(t, &p)[axis].abs());
            }
            let mut p = g.center(0);
            p[axis] -= 0.5 * h;
            max = max.max(self.drift.eval(t, &p)[axis].abs());
        }
        max
    }
}

/// Named problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `b = −λx`, `κ = 1` in one dimension.
    Ou { lambda: f64 },
    /// `b = 0`, `κ = 1/2`.
    Heat,
    /// `b = −[[1, 1], [−1, 1]] x`, `κ = 1` in two dimensions.
    RotatingDrift,
    /// `b = −λ(t) x` with `λ(t) = lambda0 + slope·t`, `κ = 1`.
    TimeVaryingOu { lambda0: f64, slope: f64 },
}

impl Preset {
    /// Parse a preset name; `lambda` and `slope` are used where relevant.
    pub fn from_name(name: &str, lambda: f64, slope: f64) -> Result<Self> {
        let preset = match name {
            "ou" => Preset::Ou { lambda },
            "heat" => Preset::Heat,
            "rotating_drift" => Preset::RotatingDrift,
            "time_varying_ou" => Preset::TimeVaryingOu {
                lambda0: lambda,
                slope,
            },
            other => return Err(Error::Config(format!("unknown preset `{other}`"))),
        };
        if !lambda.is_finite() || !slope.is_finite() {
            return Err(Error::Config("preset parameters must be finite".into()));
        }
        Ok(preset)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Ou { .. } => "ou",
            Preset::Heat => "heat",
            Preset::RotatingDrift => "rotating_drift",
            Preset::TimeVaryingOu { .. } => "time_varying_ou",
        }
    }

    pub fn build(&self) -> Result<ProblemSpec> {
        preset(*self)
    }
}

/// Build the [`ProblemSpec`] of a preset with its default grid and horizon.
pub fn preset(p: Preset) -> Result<ProblemSpec> {
    match p {
        Preset::Ou { lambda } => {
            if !lambda.is_finite() {
                return Err(Error::Config("lambda must be finite".into()));
            }
            let horizon = (0.0, 5.0);
            let half = ou_half_width(lambda, horizon.1);
            ProblemSpec::new(
                "ou",
                DriftField::linear(1, move |_| [[-lambda, 0.0], [0.0, 0.0]]),
                DiffusionSpec::constant(1.0),
                SpatialGrid::new_1d(-half, half, 512)?,
                horizon,
            )
        }
        Preset::Heat => {
            let horizon = (0.0f64, 5.0f64);
            // unit-variance data spread to variance 1 + t
            let half = (8.0 * (1.0 + horizon.1).sqrt() + 2.0).ceil();
            ProblemSpec::new(
                "heat",
                DriftField::zero(1),
                DiffusionSpec::constant(0.5),
                SpatialGrid::new_1d(-half, half, 512)?,
                horizon,
            )
        }
        Preset::RotatingDrift => ProblemSpec::new(
            "rotating_drift",
            DriftField::linear(2, |_| [[-1.0, -1.0], [1.0, -1.0]]),
            DiffusionSpec::constant(1.0),
            SpatialGrid::new_2d([-8.0, -8.0], [8.0, 8.0], [128, 128])?,
            (0.0, 2.0),
        ),
        Preset::TimeVaryingOu { lambda0, slope } => {
            time_varying_ou(move |t| lambda0 + slope * t, (0.0, 2.0))
        }
    }
}

/// One-dimensional OU problem with a time-dependent rate, `b = −λ(t) x`, `κ = 1`.
pub fn time_varying_ou(
    lambda: impl Fn(f64) -> f64 + Send + Sync + 'static,
    horizon: (f64, f64),
) -> Result<ProblemSpec> {
    let lambda = Arc::new(lambda);
    let min_lambda = (0..=64)
        .map(|k| lambda(horizon.0 + (horizon.1 - horizon.0) * k as f64 / 64.0))
        .fold(f64::INFINITY, f64::min);
    if !min_lambda.is_finite() {
        return Err(Error::Config("lambda(t) must be finite on the horizon".into()));
    }
    let half = ou_half_width(min_lambda, horizon.1 - horizon.0);
    let l = Arc::clone(&lambda);
    ProblemSpec::new(
        "time_varying_ou",
        DriftField::linear(1, move |t| [[-l(t), 0.0], [0.0, 0.0]]),
        DiffusionSpec::constant(1.0),
        SpatialGrid::new_1d(-half, half, 512)?,
        horizon,
    )
}

fn ou_half_width(lambda: f64, duration: f64) -> f64 {
    let sd = if lambda > 0.0 {
        (1.0 / lambda).sqrt().max(1.0)
    } else if lambda == 0.0 {
        (1.0 + 2.0 * duration).sqrt()
    } else {
        (1.0 + (-2.0 * lambda * duration).exp_m1() / -lambda).sqrt()
    };
    (8.0 * sd + 2.0).ceil()
}

/// Deterministic low-discrepancy sample of the space-time box.
///
/// Uses a Halton sequence (bases 2, 3, 5) shifted modulo one by a
/// seed-derived offset. A single sample is the box centre.
pub fn sample_points(spec: &ProblemSpec, count: usize, seed: u64) -> Vec<(f64, Point)> {
    assert!(count >= 1, "sample count must be at least 1");
    let g = &spec.grid;
    let (t0, t1) = spec.horizon;
    let scale = |u: &[f64; 3]| {
        let t = t0 + u[0] * (t1 - t0);
        let mut x = [0.0; MAX_DIM];
        for a in 0..g.dim() {
            x[a] = g.lower()[a] + u[a + 1] * (g.upper()[a] - g.lower()[a]);
        }
        (t, x)
    };
    if count == 1 {
        return vec![scale(&[0.5; 3])];
    }
    let mut state = seed;
    let shift = [
        unit_from_bits(splitmix64(&mut state)),
        unit_from_bits(splitmix64(&mut state)),
        unit_from_bits(splitmix64(&mut state)),
    ];
    (1..=count as u64)
        .map(|k| {
            let mut u = [radical_inverse(k, 2), radical_inverse(k, 3), radical_inverse(k, 5)];
            for (ui, s) in u.iter_mut().zip(shift) {
                *ui = (*ui + s).fract();
            }
            scale(&u)
        })
        .collect()
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += (k % base) as f64 * f;
        k /= base;
        f *= inv;
    }
    r
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_presets() -> Vec<ProblemSpec> {
        vec![
            preset(Preset::Ou { lambda: 1.0 }).unwrap(),
            preset(Preset::Heat).unwrap(),
            preset(Preset::RotatingDrift).unwrap(),
            preset(Preset::TimeVaryingOu {
                lambda0: 1.0,
                slope: 1.0,
            })
            .unwrap(),
        ]
    }

    #[test]
    fn ou_preset_coefficients() {
        let spec = preset(Preset::Ou { lambda: 1.0 }).unwrap();
        assert_eq!(spec.drift.eval(0.3, &[2.5, 0.0])[0], -2.5);
        assert_eq!(spec.diffusion.kappa(1.0), 1.0);
    }

    #[test]
    fn heat_preset_coefficients() {
        let spec = preset(Preset::Heat).unwrap();
        assert_eq!(spec.drift.eval(1.0, &[3.0, 0.0]), [0.0, 0.0]);
        assert_eq!(spec.diffusion.kappa(2.0), 0.5);
    }

    #[test]
    fn rotating_drift_coefficients() {
        let spec = preset(Preset::RotatingDrift).unwrap();
        let b = spec.drift.eval(0.0, &[1.0, 2.0]);
        // −[[1,1],[−1,1]]·(1,2) = −(3, 1)
        assert_eq!(b, [-3.0, -1.0]);
    }

    #[test]
    fn unknown_preset_is_config_error() {
        assert!(matches!(
            Preset::from_name("brownian_bridge", 1.0, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        for spec in all_presets() {
            for (t, x) in sample_points(&spec, 100, 11) {
                let a = spec.drift.jacobian(t, &x);
                let f = spec.drift.fd_jacobian(t, &x);
                for i in 0..spec.dim() {
                    for j in 0..spec.dim() {
                        let err = (a[i][j] - f[i][j]).abs() / a[i][j].abs().max(1.0);
                        assert!(err <= 1e-4, "{}: {:?} vs {:?}", spec.name, a, f);
                    }
                }
            }
        }
    }

    #[test]
    fn ou_drift_is_linear() {
        let spec = preset(Preset::Ou { lambda: 1.7 }).unwrap();
        let pts = sample_points(&spec, 50, 3);
        for w in pts.windows(2) {
            let (t, x) = w[0];
            let y = w[1].1;
            let sum = [x[0] + y[0], 0.0];
            let lhs = spec.drift.eval(t, &sum)[0];
            let rhs = spec.drift.eval(t, &x)[0] + spec.drift.eval(t, &y)[0];
            assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * 1.7 * (x[0].abs() + y[0].abs() + 1.0));
        }
    }

    #[test]
    fn single_sample_is_box_centre() {
        let spec = preset(Preset::Ou { lambda: 1.0 }).unwrap();
        let p = sample_points(&spec, 1, 99);
        assert_eq!(p, vec![(2.5, [0.0, 0.0])]);
    }

    #[test]
    fn samples_are_distinct_and_contained() {
        let spec = preset(Preset::Ou { lambda: 1.0 }).unwrap();
        let p = sample_points(&spec, 16, 5);
        for i in 0..p.len() {
            for j in 0..i {
                assert_ne!(p[i], p[j]);
            }
        }
        let heat = preset(Preset::Heat).unwrap();
        for (t, x) in sample_points(&heat, 1000, 8) {
            assert!((heat.horizon.0..=heat.horizon.1).contains(&t));
            assert!(x[0] >= heat.grid.lower()[0] && x[0] <= heat.grid.upper()[0]);
        }
    }

    #[test]
    fn samples_are_reproducible() {
        let spec = preset(Preset::RotatingDrift).unwrap();
        assert_eq!(sample_points(&spec, 32, 4), sample_points(&spec, 32, 4));
        assert_ne!(sample_points(&spec, 32, 4), sample_points(&spec, 32, 5));
    }

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new_1d(-1.0, 1.0, 7).is_err());
        assert!(SpatialGrid::new_1d(1.0, -1.0, 16).is_err());
        assert!(SpatialGrid::new(2, [0.0, 0.0], [1.0, 1.0], [4096, 4096], DEFAULT_CELL_CAP).is_err());
        let g = SpatialGrid::new_2d([-1.0, -2.0], [1.0, 2.0], [8, 16]).unwrap();
        assert_eq!(g.len(), 128);
        assert!((g.cell_volume() - 0.25 * 0.25).abs() < 1e-15);
        let k = g.flat(3, 5);
        assert_eq!(g.unflat(k), [3, 5]);
        assert_eq!(g.locate(&g.center(k)), Some(k));
    }

    #[test]
    fn presets_truncate_gaussian_mass() {
        // ±8 standard deviations of the stationary/initial Gaussians plus margin
        let spec = preset(Preset::Ou { lambda: 1.0 }).unwrap();
        assert!(spec.grid.upper()[0] >= 10.0);
        let heat = preset(Preset::Heat).unwrap();
        assert!(heat.grid.upper()[0] >= 8.0 * 6f64.sqrt());
    }
}
