//! Forward Fokker–Planck solver `∂ₜu + div(b u − κ∇u) = 0` and backward
//! Kolmogorov solver `∂ₛh = −Lₛh` on the truncated box.
//!
//! The forward solver is a conservative finite-volume scheme with no-flux
//! walls and Heun time stepping. Three advective fluxes are available; the
//! default exponentially fitted flux
//! `F = (κ/h)[B(−P)u_L − B(P)u_R]`, `P = b h/κ`, `B(z) = z/(eᶻ − 1)`
//! reduces to central diffusion when `b = 0` and to upwinding when `|P|`
//! is large. The linear fluxes give a Markov matrix, so positivity and
//! discrete entropy decay hold for any step within the positivity limit.
//!
//! The backward solver uses fourth-order central differences with
//! mirror ghost cells (homogeneous Neumann) and classical RK4. A monotone
//! alternative built from the transpose of the forward matrix is kept for
//! comparison.

use std::io::Write;

use crate::bounds::DecayEnvelope;
use crate::curvature::{estimate_rho, CurvatureProfile};
use crate::density::DensityGrid;
use crate::entropy::{dissipation, relative_entropy, PhiFunction};
use crate::error::{Error, Result};
use crate::model::{ProblemSpec, SpatialGrid};
use crate::report::csv::fmt_f64;

/// Safety factor of the explicit step formula.
pub const CFL_SAFETY: f64 = 0.4;

/// Advective flux of the forward scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdvectionScheme {
    /// Scharfetter–Gummel / Chang–Cooper exponential fitting.
    #[default]
    ExponentialFitting,
    /// First-order upwind plus central diffusion.
    Upwind,
    /// MUSCL reconstruction with the van Leer limiter.
    VanLeer,
}

impl AdvectionScheme {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "exponential_fitting" | "chang_cooper" | "scharfetter_gummel" => Ok(Self::ExponentialFitting),
            "upwind" => Ok(Self::Upwind),
            "van_leer" | "vanleer" => Ok(Self::VanLeer),
            _ => Err(Error::Config(format!("unknown advection scheme `{name}`"))),
        }
    }

    fn is_linear(&self) -> bool {
        !matches!(self, Self::VanLeer)
    }
}

/// Discretisation of the backward equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackwardScheme {
    /// Fourth-order central stencils with RK4.
    #[default]
    FourthOrder,
    /// Transpose of the exponentially fitted forward matrix with Heun
    /// steps; second order and monotone.
    Monotone,
}

fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Face coefficients at one time: the flux through the face to the right
/// of cell `k` along `axis` is `left[axis][k]·u[k] − right[axis][k]·u[k+s]`.
struct FaceRates {
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    drift: Vec<Vec<f64>>,
    kappa: f64,
}

fn has_right_face(grid: &SpatialGrid, k: usize, axis: usize) -> bool {
    grid.unflat(k)[axis] + 1 < grid.cells_along(axis)
}

fn face_rates(spec: &ProblemSpec, t: f64, scheme: AdvectionScheme) -> FaceRates {
    let grid = &spec.grid;
    let kappa = spec.diffusion.kappa(t);
    let d = grid.dim();
    let n = grid.len();
    let mut left = vec![vec![0.0; n]; d];
    let mut right = vec![vec![0.0; n]; d];
    let mut drift = vec![vec![0.0; n]; d];
    for a in 0..d {
        let h = grid.spacing(a);
        let diff = kappa / h;
        for k in 0..n {
            if !has_right_face(grid, k, a) {
                continue;
            }
            let mut x = grid.center(k);
            x[a] += 0.5 * h;
            let b = spec.drift.eval(t, &x)[a];
            drift[a][k] = b;
            let (l, r) = match scheme {
                AdvectionScheme::ExponentialFitting => {
                    let p = b * h / kappa;
                    (diff * bernoulli(-p), diff * bernoulli(p))
                }
                AdvectionScheme::Upwind | AdvectionScheme::VanLeer => (b.max(0.0) + diff, diff - b.min(0.0)),
            };
            left[a][k] = l;
            right[a][k] = r;
        }
    }
    FaceRates {
        left,
        right,
        drift,
        kappa,
    }
}

/// Largest total outflow rate of any cell, `max_k Σ_faces rate/h`.
fn max_outflow(grid: &SpatialGrid, rates: &FaceRates) -> f64 {
    let mut out = vec![0.0; grid.len()];
    for a in 0..grid.dim() {
        let h = grid.spacing(a);
        let s = grid.stride(a);
        for k in 0..grid.len() {
            if has_right_face(grid, k, a) {
                out[k] += rates.left[a][k] / h;
                out[k + s] += rates.right[a][k] / h;
            }
        }
    }
    out.into_iter().fold(0.0, f64::max)
}

/// Step bound at time `t`: `0.4·min(h²/(2dκ), h/max|b|)`, further capped by
/// the forward-Euler positivity limit of the linear schemes.
pub fn cfl_limit(spec: &ProblemSpec, t: f64, scheme: AdvectionScheme) -> f64 {
    let rates = face_rates(spec, t, scheme);
    cfl_from_rates(spec, &rates, scheme)
}

fn cfl_from_rates(spec: &ProblemSpec, rates: &FaceRates, scheme: AdvectionScheme) -> f64 {
    let grid = &spec.grid;
    let d = grid.dim() as f64;
    let h = (0..grid.dim()).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let bmax = rates
        .drift
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, b| m.max(b.abs()));
    let mut limit = CFL_SAFETY * (h * h / (2.0 * d * rates.kappa)).min(h / bmax);
    if scheme.is_linear() {
        limit = limit.min(1.0 / max_outflow(grid, rates));
    }
    limit
}

fn apply_forward(grid: &SpatialGrid, rates: &FaceRates, scheme: AdvectionScheme, u: &[f64], du: &mut [f64]) {
    du.iter_mut().for_each(|v| *v = 0.0);
    for a in 0..grid.dim() {
        let h = grid.spacing(a);
        let s = grid.stride(a);
        let n_a = grid.cells_along(a);
        for k in 0..grid.len() {
            if !has_right_face(grid, k, a) {
                continue;
            }
            let flux = match scheme {
                AdvectionScheme::VanLeer => {
                    let b = rates.drift[a][k];
                    let i = grid.unflat(k)[a];
                    let (ul, ur) = (u[k], u[k + s]);
                    let face = if b >= 0.0 {
                        if i >= 1 {
                            ul + 0.5 * van_leer(ul - u[k - s], ur - ul)
                        } else {
                            ul
                        }
                    } else if i + 2 < n_a {
                        ur - 0.5 * van_leer(u[k + 2 * s] - ur, ur - ul)
                    } else {
                        ur
                    };
                    b * face - rates.kappa * (ur - ul) / h
                }
                _ => rates.left[a][k] * u[k] - rates.right[a][k] * u[k + s],
            };
            du[k] -= flux / h;
            du[k + s] += flux / h;
        }
    }
}

/// Limited slope from the upwind difference `up` and downwind difference
/// `down`.
fn van_leer(up: f64, down: f64) -> f64 {
    if up * down <= 0.0 {
        0.0
    } else {
        2.0 * up * down / (up + down)
    }
}

fn check_finite(u: &[f64], step: usize, t: f64) -> Result<()> {
    if let Some(k) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            step,
            t,
            what: format!("non-finite density {} in cell {k}", u[k]),
        });
    }
    Ok(())
}

/// One Heun step with the default flux.
pub fn step_forward(state: &DensityGrid, t: f64, dt: f64, spec: &ProblemSpec) -> Result<DensityGrid> {
    step_forward_with(state, t, dt, spec, AdvectionScheme::default())
}

/// One Heun step of size `dt` from time `t`.
pub fn step_forward_with(
    state: &DensityGrid,
    t: f64,
    dt: f64,
    spec: &ProblemSpec,
    scheme: AdvectionScheme,
) -> Result<DensityGrid> {
    if state.grid() != &spec.grid {
        return Err(Error::Input("state does not live on the problem grid".into()));
    }
    let mut u = state.values().to_vec();
    let mut stepper = Heun::new(spec, scheme);
    stepper.step(&mut u, t, dt, 0)?;
    DensityGrid::new(spec.grid, u)
}

struct Heun<'a> {
    spec: &'a ProblemSpec,
    scheme: AdvectionScheme,
    k1: Vec<f64>,
    u1: Vec<f64>,
}

impl<'a> Heun<'a> {
    fn new(spec: &'a ProblemSpec, scheme: AdvectionScheme) -> Self {
        let n = spec.grid.len();
        Self {
            spec,
            scheme,
            k1: vec![0.0; n],
            u1: vec![0.0; n],
        }
    }

    fn step(&mut self, u: &mut [f64], t: f64, dt: f64, step: usize) -> Result<()> {
        let grid = &self.spec.grid;
        let r0 = face_rates(self.spec, t, self.scheme);
        let r1 = face_rates(self.spec, t + dt, self.scheme);
        let limit = cfl_from_rates(self.spec, &r0, self.scheme).min(cfl_from_rates(self.spec, &r1, self.scheme));
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepSize { dt, limit, t });
        }
        apply_forward(grid, &r0, self.scheme, u, &mut self.k1);
        for k in 0..u.len() {
            self.u1[k] = u[k] + dt * self.k1[k];
        }
        apply_forward(grid, &r1, self.scheme, &self.u1, &mut self.k1);
        for k in 0..u.len() {
            // rounding can leave −1e-320-sized values in empty tails
            u[k] = (0.5 * (u[k] + self.u1[k] + dt * self.k1[k])).max(0.0);
        }
        check_finite(u, step, t + dt)
    }
}

/// Advance `u0` from `t_start` through each of `outputs`, landing exactly on
/// every output time. Returns the densities at the outputs.
pub fn evolve(
    u0: &DensityGrid,
    spec: &ProblemSpec,
    t_start: f64,
    outputs: &[f64],
    scheme: AdvectionScheme,
) -> Result<Vec<DensityGrid>> {
    let mut out = Vec::with_capacity(outputs.len());
    evolve_each(&[u0], spec, t_start, outputs, scheme, |_, _, states| {
        out.push(DensityGrid::new(spec.grid, states[0].to_vec())?);
        Ok(())
    })?;
    Ok(out)
}

/// Advance several densities with shared steps, calling `visit` at each
/// output time. Returns the total number of steps taken.
fn evolve_each(
    initial: &[&DensityGrid],
    spec: &ProblemSpec,
    t_start: f64,
    outputs: &[f64],
    scheme: AdvectionScheme,
    mut visit: impl FnMut(usize, f64, &[Vec<f64>]) -> Result<()>,
) -> Result<usize> {
    for u in initial {
        if u.grid() != &spec.grid {
            return Err(Error::Input("initial density does not live on the problem grid".into()));
        }
    }
    validate_outputs(spec, t_start, outputs)?;
    let mut states: Vec<Vec<f64>> = initial.iter().map(|u| u.values().to_vec()).collect();
    let mut heun = Heun::new(spec, scheme);
    let mut t = t_start;
    let mut steps = 0;
    for (i, &target) in outputs.iter().enumerate() {
        while t < target {
            let remaining = target - t;
            let limit = 0.95 * cfl_limit(spec, t, scheme);
            let n = (remaining / limit).ceil().max(1.0);
            let dt = if n == 1.0 { remaining } else { remaining / n };
            for s in states.iter_mut() {
                heun.step(s, t, dt, steps)?;
            }
            steps += 1;
            t = if n == 1.0 { target } else { t + dt };
        }
        visit(i, target, &states)?;
    }
    Ok(steps)
}

fn validate_outputs(spec: &ProblemSpec, t_start: f64, outputs: &[f64]) -> Result<()> {
    let (a, b) = spec.horizon;
    let slack = 1e-12 * (1.0 + b.abs());
    if t_start < a - slack || t_start > b + slack {
        return Err(Error::Input(format!("start time {t_start} outside horizon [{a}, {b}]")));
    }
    if outputs.is_empty() {
        return Err(Error::Input("no output times".into()));
    }
    let mut prev = t_start;
    for &t in outputs {
        if t < prev || t > b + slack {
            return Err(Error::Input(format!(
                "output times must increase from {t_start} within the horizon; got {t}"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// Options for [`evolve_pair_with`].
#[derive(Debug, Clone, Default)]
pub struct ForwardOptions {
    pub scheme: AdvectionScheme,
    /// Profile for the envelope; [`estimate_rho`] with 64 samples when absent.
    pub profile: Option<CurvatureProfile>,
    /// Keep the densities at every output time.
    pub keep_densities: bool,
}

/// Two orbits of the same equation and their entropy diagnostics.
#[derive(Debug, Clone)]
pub struct OrbitPair {
    pub times: Vec<f64>,
    pub mass_u: Vec<f64>,
    pub mass_v: Vec<f64>,
    pub entropy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub ill_conditioned: Vec<bool>,
    /// `H(0)·c(t)` when an initial constant was given and Φ is kl.
    pub envelope: Option<Vec<f64>>,
    pub violation: Vec<bool>,
    pub u: Vec<DensityGrid>,
    pub v: Vec<DensityGrid>,
    pub phi: PhiFunction,
    pub steps: usize,
}

impl OrbitPair {
    /// Any output where `H(t) > H(0)c(t) + 5%·H(0)`.
    pub fn falsified(&self) -> bool {
        self.violation.iter().any(|&v| v)
    }

    /// Largest increase of the entropy between consecutive outputs.
    pub fn max_entropy_increase(&self) -> f64 {
        self.entropy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest mass deviation from the initial mass, for either orbit.
    pub fn max_mass_drift(&self) -> f64 {
        let drift = |m: &[f64]| m.iter().map(|x| (x - m[0]).abs()).fold(0.0, f64::max);
        drift(&self.mass_u).max(drift(&self.mass_v))
    }

    /// Columns `t, mass_u, mass_v, H_phi, dissipation, envelope, violation_flag`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,mass_u,mass_v,H_phi,dissipation,envelope,violation_flag")?;
        for i in 0..self.times.len() {
            let env = self.envelope.as_ref().map_or(f64::NAN, |e| e[i]);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(self.times[i]),
                fmt_f64(self.mass_u[i]),
                fmt_f64(self.mass_v[i]),
                fmt_f64(self.entropy[i]),
                fmt_f64(self.dissipation[i]),
                fmt_f64(env),
                u8::from(self.violation[i])
            )?;
        }
        Ok(())
    }
}

/// Evolve `u0` and `v0` together from the start of the horizon.
pub fn evolve_pair(
    u0: &DensityGrid,
    v0: &DensityGrid,
    spec: &ProblemSpec,
    phi: PhiFunction,
    outputs: &[f64],
    d0: Option<f64>,
) -> Result<OrbitPair> {
    evolve_pair_with(u0, v0, spec, phi, outputs, d0, &ForwardOptions::default())
}

pub fn evolve_pair_with(
    u0: &DensityGrid,
    v0: &DensityGrid,
    spec: &ProblemSpec,
    phi: PhiFunction,
    outputs: &[f64],
    d0: Option<f64>,
    options: &ForwardOptions,
) -> Result<OrbitPair> {
    let t0 = spec.horizon.0;
    let h0 = relative_entropy(u0, v0, phi)?;
    let envelope = match (d0, phi) {
        (Some(d0), PhiFunction::Kl) => {
            let profile = match &options.profile {
                Some(p) => p.clone(),
                None => estimate_rho(spec, 64)?,
            };
            Some(DecayEnvelope::new(d0, &profile)?)
        }
        _ => None,
    };
    let mut pair = OrbitPair {
        times: Vec::new(),
        mass_u: Vec::new(),
        mass_v: Vec::new(),
        entropy: Vec::new(),
        dissipation: Vec::new(),
        ill_conditioned: Vec::new(),
        envelope: envelope.as_ref().map(|_| Vec::new()),
        violation: Vec::new(),
        u: Vec::new(),
        v: Vec::new(),
        phi,
        steps: 0,
    };
    pair.steps = evolve_each(&[u0, v0], spec, t0, outputs, options.scheme, |_, t, states| {
        let u = DensityGrid::new(spec.grid, states[0].clone())?;
        let v = DensityGrid::new(spec.grid, states[1].clone())?;
        let h = relative_entropy(&u, &v, phi)?;
        let diss = dissipation(&u, &v, phi, t, spec)?;
        pair.times.push(t);
        pair.mass_u.push(u.mass());
        pair.mass_v.push(v.mass());
        pair.entropy.push(h);
        pair.dissipation.push(diss.value);
        pair.ill_conditioned.push(diss.ill_conditioned);
        let mut flag = false;
        if let (Some(env), Some(series)) = (&envelope, pair.envelope.as_mut()) {
            let bound = h0 * env.c_envelope(t)?;
            series.push(bound);
            flag = h > bound + 0.05 * h0;
        }
        pair.violation.push(flag);
        if options.keep_densities {
            pair.u.push(u);
            pair.v.push(v);
        }
        Ok(())
    })?;
    Ok(pair)
}

/// Per-stage coefficients of the backward operator.
struct BackwardCoefficients {
    kappa: f64,
    drift: Vec<Vec<f64>>,
}

fn backward_coefficients(spec: &ProblemSpec, tau: f64) -> BackwardCoefficients {
    let grid = &spec.grid;
    let drift = (0..grid.dim())
        .map(|a| (0..grid.len()).map(|k| spec.drift.eval(tau, &grid.center(k))[a]).collect())
        .collect();
    BackwardCoefficients {
        kappa: spec.diffusion.kappa(tau),
        drift,
    }
}

/// `L h = κΔh + b·∇h` with fourth-order stencils and mirror ghosts.
fn apply_generator(grid: &SpatialGrid, c: &BackwardCoefficients, h: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let cells = grid.cells();
    for a in 0..grid.dim() {
        let dx = grid.spacing(a);
        let s = grid.stride(a);
        let n = grid.cells_along(a);
        let (c1, c2) = (1.0 / (12.0 * dx), c.kappa / (12.0 * dx * dx));
        let drift = &c.drift[a];
        let lines = grid.len() / n;
        for line in 0..lines {
            let start = if a == 0 { line } else { line * cells[1] };
            // mirror ghosts: index −1 ↦ 0, −2 ↦ 1, n ↦ n−1, n+1 ↦ n−2
            let idx = |j: isize| -> usize {
                let j = if j < 0 {
                    -1 - j
                } else if j >= n as isize {
                    2 * n as isize - 1 - j
                } else {
                    j
                };
                start + j as usize * s
            };
            let mut apply = |i: usize, m2: f64, m1: f64, p1: f64, p2: f64| {
                let k = start + i * s;
                let d1 = c1 * (m2 - 8.0 * m1 + 8.0 * p1 - p2);
                let d2 = c2 * (-m2 + 16.0 * m1 - 30.0 * h[k] + 16.0 * p1 - p2);
                out[k] += d2 + drift[k] * d1;
            };
            for i in [0, 1, n - 2, n - 1] {
                let j = i as isize;
                apply(i, h[idx(j - 2)], h[idx(j - 1)], h[idx(j + 1)], h[idx(j + 2)]);
            }
            for i in 2..n - 2 {
                let k = start + i * s;
                apply(i, h[k - 2 * s], h[k - s], h[k + s], h[k + 2 * s]);
            }
        }
    }
}

/// Transposed forward matrix applied to `h`: `(Aᵀh)_k`.
fn apply_adjoint(grid: &SpatialGrid, rates: &FaceRates, h: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for a in 0..grid.dim() {
        let dx = grid.spacing(a);
        let s = grid.stride(a);
        for k in 0..grid.len() {
            if !has_right_face(grid, k, a) {
                continue;
            }
            let diff = (h[k + s] - h[k]) / dx;
            out[k] += rates.left[a][k] * diff;
            out[k + s] -= rates.right[a][k] * diff;
        }
    }
}

/// Step bound for the backward equation at time `tau`.
pub fn backward_dt_limit(spec: &ProblemSpec, tau: f64) -> f64 {
    let grid = &spec.grid;
    let d = grid.dim() as f64;
    let h = (0..grid.dim()).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let kappa = spec.diffusion.kappa(tau);
    let bmax = (0..grid.len())
        .map(|k| {
            let b = spec.drift.eval(tau, &grid.center(k));
            b[0].abs().max(b[1].abs())
        })
        .fold(0.0f64, f64::max);
    CFL_SAFETY * (h * h / (2.0 * d * kappa)).min(h / bmax)
}

/// `P_{s,t} g`: solve `∂_τh = −L_τh` from `h(t) = g` back to `τ = s`.
pub fn backward_solve(g: &[f64], s: f64, t: f64, spec: &ProblemSpec) -> Result<Vec<f64>> {
    Ok(backward_solve_many(&[g.to_vec()], s, t, spec, BackwardScheme::default())?.remove(0))
}

/// [`backward_solve`] for several terminal functions with shared steps.
pub fn backward_solve_many(
    gs: &[Vec<f64>],
    s: f64,
    t: f64,
    spec: &ProblemSpec,
    scheme: BackwardScheme,
) -> Result<Vec<Vec<f64>>> {
    let grid = spec.grid;
    if s > t {
        return Err(Error::Input(format!("backward solve needs s <= t, got s = {s}, t = {t}")));
    }
    for g in gs {
        if g.len() != grid.len() {
            return Err(Error::Input("terminal function does not match the grid".into()));
        }
        check_finite(g, 0, t)?;
    }
    let mut hs: Vec<Vec<f64>> = gs.to_vec();
    let n = grid.len();
    let mut tau = t;
    let mut step = 0;
    let mut stage = vec![vec![0.0; n]; 4];
    let mut tmp = vec![0.0; n];
    while tau > s {
        let remaining = tau - s;
        let limit = 0.95
            * match scheme {
                BackwardScheme::FourthOrder => backward_dt_limit(spec, tau),
                BackwardScheme::Monotone => {
                    cfl_limit(spec, tau, AdvectionScheme::ExponentialFitting)
                        .min(cfl_limit(spec, (tau - remaining.min(1.0)).max(s), AdvectionScheme::ExponentialFitting))
                }
            };
        let k = (remaining / limit).ceil().max(1.0);
        let dt = if k == 1.0 { remaining } else { remaining / k };
        match scheme {
            BackwardScheme::FourthOrder => {
                let c0 = backward_coefficients(spec, tau);
                let cm = backward_coefficients(spec, tau - 0.5 * dt);
                let c1 = backward_coefficients(spec, tau - dt);
                for h in hs.iter_mut() {
                    apply_generator(&grid, &c0, h, &mut stage[0]);
                    for i in 0..n {
                        tmp[i] = h[i] + 0.5 * dt * stage[0][i];
                    }
                    apply_generator(&grid, &cm, &tmp, &mut stage[1]);
                    for i in 0..n {
                        tmp[i] = h[i] + 0.5 * dt * stage[1][i];
                    }
                    apply_generator(&grid, &cm, &tmp, &mut stage[2]);
                    for i in 0..n {
                        tmp[i] = h[i] + dt * stage[2][i];
                    }
                    apply_generator(&grid, &c1, &tmp, &mut stage[3]);
                    for i in 0..n {
                        h[i] += dt / 6.0 * (stage[0][i] + 2.0 * stage[1][i] + 2.0 * stage[2][i] + stage[3][i]);
                    }
                    check_finite(h, step, tau - dt)?;
                }
            }
            BackwardScheme::Monotone => {
                let r0 = face_rates(spec, tau, AdvectionScheme::ExponentialFitting);
                let r1 = face_rates(spec, tau - dt, AdvectionScheme::ExponentialFitting);
                for h in hs.iter_mut() {
                    apply_adjoint(&grid, &r0, h, &mut stage[0]);
                    for i in 0..n {
                        tmp[i] = h[i] + dt * stage[0][i];
                    }
                    apply_adjoint(&grid, &r1, &tmp, &mut stage[1]);
                    for i in 0..n {
                        h[i] = 0.5 * (h[i] + tmp[i] + dt * stage[1][i]);
                    }
                    check_finite(h, step, tau - dt)?;
                }
            }
        }
        step += 1;
        tau = if k == 1.0 { s } else { tau - dt };
    }
    Ok(hs)
}
