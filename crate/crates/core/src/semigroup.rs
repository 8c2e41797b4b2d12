//! Numerical checks of the gradient commutation bound and of the local
//! Φ-Sobolev and log-Sobolev inequalities of the inhomogeneous semigroup.
//!
//! Pointwise checks compare the two sides on the central 90% of the box;
//! a check passes when `min(RHS − LHS) ≥ −tol·max(max RHS, 1e-12)`.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{Antiderivative, DecayEnvelope};
use crate::curvature::{estimate_rho, gamma, CurvatureProfile};
use crate::density::DensityGrid;
use crate::entropy::PhiFunction;
use crate::error::{Error, Result};
use crate::fokker_planck::{backward_solve_many, evolve, AdvectionScheme, BackwardScheme};
use crate::model::{Point, ProblemSpec};
use crate::report::csv::fmt_f64;
use crate::testfn::TestFunction;

/// Relative tolerance of the semigroup checks.
pub const SEMIGROUP_TOL: f64 = 1e-4;

/// Fraction of the box on which pointwise residuals are evaluated.
pub const INTERIOR_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InequalityKind {
    Commutation,
    PhiSobolev,
    Lsi,
    PropagatedLsi,
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Commutation => "commutation",
            Self::PhiSobolev => "phi_sobolev",
            Self::Lsi => "lsi",
            Self::PropagatedLsi => "propagated_lsi",
        })
    }
}

/// Where the worst residual was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub test_id: usize,
    pub point: Point,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    /// `min(RHS − LHS)` over the evaluation points.
    pub worst_residual: f64,
    pub tolerance: f64,
    pub witness: Witness,
    /// Number of test functions aggregated into this report.
    pub trials: usize,
}

impl InequalityReport {
    pub fn pass(&self) -> bool {
        self.worst_residual >= -self.tolerance
    }

    fn margin(&self) -> f64 {
        self.worst_residual / self.tolerance
    }

    /// The report with the smallest `residual/tolerance`.
    pub fn worst_of(reports: Vec<InequalityReport>) -> Option<InequalityReport> {
        let trials = reports.iter().map(|r| r.trials).sum();
        let mut worst = reports.into_iter().min_by(|a, b| a.margin().total_cmp(&b.margin()))?;
        worst.trials = trials;
        Some(worst)
    }
}

/// One row per report: `kind, s, t, worst_residual, tolerance, pass`.
pub fn write_reports_csv(mut w: impl Write, reports: &[InequalityReport]) -> Result<()> {
    writeln!(w, "kind,s,t,worst_residual,tolerance,pass")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.kind,
            fmt_f64(r.witness.s),
            fmt_f64(r.witness.t),
            fmt_f64(r.worst_residual),
            fmt_f64(r.tolerance),
            u8::from(r.pass())
        )?;
    }
    Ok(())
}

fn pointwise(
    kind: InequalityKind,
    spec: &ProblemSpec,
    lhs: &[f64],
    rhs: &[f64],
    s: f64,
    t: f64,
    test_id: usize,
) -> InequalityReport {
    let grid = &spec.grid;
    let mut worst = f64::INFINITY;
    let mut at = 0;
    let mut scale = 0.0f64;
    for k in 0..grid.len() {
        if !grid.is_interior(k, INTERIOR_FRACTION) {
            continue;
        }
        scale = scale.max(rhs[k]);
        let r = rhs[k] - lhs[k];
        if r < worst {
            worst = r;
            at = k;
        }
    }
    InequalityReport {
        kind,
        worst_residual: worst,
        tolerance: SEMIGROUP_TOL * scale.max(1e-12),
        witness: Witness {
            test_id,
            point: grid.center(at),
            s,
            t,
        },
        trials: 1,
    }
}

fn check_times(s: f64, t: f64, spec: &ProblemSpec, profile: &CurvatureProfile) -> Result<()> {
    let (a, b) = spec.horizon;
    if !(s <= t) || s < a || t > b {
        return Err(Error::Input(format!("need {a} <= s <= t <= {b}, got s = {s}, t = {t}")));
    }
    if !profile.covers(s, t) {
        return Err(Error::Input(format!("profile does not cover [{s}, {t}]")));
    }
    Ok(())
}

/// `√Γ(τ)(P_{τ,t}g) ≤ exp(−∫_τᵗρ)·P_{τ,t}(√Γ(t)(g))`.
pub fn check_commutation(
    g: &[f64],
    tau: f64,
    t: f64,
    spec: &ProblemSpec,
    profile: &CurvatureProfile,
) -> Result<InequalityReport> {
    commutation_with(g, tau, t, spec, &Antiderivative::new(profile), 0)
}

fn commutation_with(
    g: &[f64],
    tau: f64,
    t: f64,
    spec: &ProblemSpec,
    anti: &Antiderivative,
    test_id: usize,
) -> Result<InequalityReport> {
    check_times(tau, t, spec, anti.profile())?;
    let root: Vec<f64> = gamma(g, t, spec).into_iter().map(f64::sqrt).collect();
    let solved = backward_solve_many(&[g.to_vec(), root], tau, t, spec, BackwardScheme::FourthOrder)?;
    let lhs: Vec<f64> = gamma(&solved[0], tau, spec).into_iter().map(f64::sqrt).collect();
    let factor = anti.gradient_factor(tau, t);
    let rhs: Vec<f64> = solved[1].iter().map(|v| factor * v).collect();
    Ok(pointwise(InequalityKind::Commutation, spec, &lhs, &rhs, tau, t, test_id))
}

/// `Ent^Φ_{P_{s,t}}(g) ≤ c(s,t)·P_{s,t}(Φ″(g)Γ(t)(g))`.
pub fn check_phi_sobolev(
    g: &[f64],
    s: f64,
    t: f64,
    spec: &ProblemSpec,
    profile: &CurvatureProfile,
    phi: PhiFunction,
) -> Result<InequalityReport> {
    phi_sobolev_with(g, s, t, spec, &Antiderivative::new(profile), phi, InequalityKind::PhiSobolev, 0)
}

/// Local log-Sobolev inequality `Ent_{P_{s,t}}(g) ≤ c(s,t)·P_{s,t}(Γ(t)(g)/g)`.
pub fn check_lsi(
    g: &[f64],
    s: f64,
    t: f64,
    spec: &ProblemSpec,
    profile: &CurvatureProfile,
) -> Result<InequalityReport> {
    phi_sobolev_with(g, s, t, spec, &Antiderivative::new(profile), PhiFunction::Kl, InequalityKind::Lsi, 0)
}

#[allow(clippy::too_many_arguments)]
fn phi_sobolev_with(
    g: &[f64],
    s: f64,
    t: f64,
    spec: &ProblemSpec,
    anti: &Antiderivative,
    phi: PhiFunction,
    kind: InequalityKind,
    test_id: usize,
) -> Result<InequalityReport> {
    if !phi.bivariate_convex() {
        return Err(Error::NotApplicable(format!(
            "{} does not make (u, v) -> phi''(u) v^2 convex",
            phi.name()
        )));
    }
    if let Some(cell) = g.iter().position(|&z| !phi.in_domain(z) || phi.domain_lower() == Some(z)) {
        return Err(Error::Domain {
            phi: if phi == PhiFunction::Kl { "kl" } else { "phi" },
            cell,
            value: g[cell],
        });
    }
    check_times(s, t, spec, anti.profile())?;
    let phig: Vec<f64> = g.iter().map(|&z| phi.phi(z)).collect();
    let weight: Vec<f64> = gamma(g, t, spec)
        .into_iter()
        .zip(g)
        .map(|(gm, &z)| phi.phi_second(z) * gm)
        .collect();
    let solved = backward_solve_many(&[g.to_vec(), phig, weight], s, t, spec, BackwardScheme::FourthOrder)?;
    let c = anti.c_st(s, t)?;
    let lhs: Vec<f64> = (0..g.len()).map(|k| solved[1][k] - phi.phi(solved[0][k])).collect();
    let rhs: Vec<f64> = solved[2].iter().map(|v| c * v).collect();
    Ok(pointwise(kind, spec, &lhs, &rhs, s, t, test_id))
}

/// `Ent_{v(t)}(f) ≤ d(t)·∫Γ(t)(f)/f dv(t)` for random positive `f`, with
/// `v(t)` the forward orbit of `v0` and `d(t)` from `estimate_rho`.
pub fn check_propagated_lsi(
    spec: &ProblemSpec,
    v0: &DensityGrid,
    d0: f64,
    t: f64,
    trials: usize,
) -> Result<InequalityReport> {
    let profile = estimate_rho(spec, 64)?;
    check_propagated_lsi_with(spec, v0, d0, t, trials, 0, &profile)
}

/// [`check_propagated_lsi`] with an explicit seed and profile.
pub fn check_propagated_lsi_with(
    spec: &ProblemSpec,
    v0: &DensityGrid,
    d0: f64,
    t: f64,
    trials: usize,
    seed: u64,
    profile: &CurvatureProfile,
) -> Result<InequalityReport> {
    let functions: Vec<Vec<f64>> = (0..trials)
        .map(|id| TestFunction::random_positive(&spec.grid, seed, id).on_grid(&spec.grid))
        .collect();
    propagated_lsi_for(spec, v0, d0, t, &functions, profile)
}

/// Propagated log-Sobolev check for given positive test functions.
pub fn propagated_lsi_for(
    spec: &ProblemSpec,
    v0: &DensityGrid,
    d0: f64,
    t: f64,
    functions: &[Vec<f64>],
    profile: &CurvatureProfile,
) -> Result<InequalityReport> {
    if functions.is_empty() {
        return Err(Error::Input("at least one test function is needed".into()));
    }
    let t0 = spec.horizon.0;
    let v = if t > t0 {
        evolve(v0, spec, t0, &[t], AdvectionScheme::default())?.remove(0)
    } else {
        v0.clone()
    };
    let mass = v.mass();
    let d = DecayEnvelope::new(d0, profile)?.d_t(t)?;
    let reports = functions
        .iter()
        .enumerate()
        .map(|(id, f)| {
            if let Some(cell) = f.iter().position(|&z| !(z > 0.0) || !z.is_finite()) {
                return Err(Error::Domain { phi: "kl", cell, value: f[cell] });
            }
            let m = v.integrate(f) / mass;
            let flogf: Vec<f64> = f.iter().map(|&z| z * z.ln()).collect();
            let lhs = v.integrate(&flogf) / mass - m * m.ln();
            let fisher: Vec<f64> = gamma(f, t, spec).iter().zip(f).map(|(g, z)| g / z).collect();
            let rhs = d * v.integrate(&fisher) / mass;
            Ok(InequalityReport {
                kind: InequalityKind::PropagatedLsi,
                worst_residual: rhs - lhs,
                tolerance: SEMIGROUP_TOL * rhs.max(1e-12),
                witness: Witness {
                    test_id: id,
                    point: [f64::NAN; 2],
                    s: t0,
                    t,
                },
                trials: 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::worst_of(reports).unwrap())
}

/// Which randomized check a suite runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuiteCheck {
    Commutation,
    PhiSobolev(PhiFunction),
}

/// Run a check over `trials` random test functions and random time pairs
/// `s < t` in the horizon. Test function 0 is affine.
pub fn run_suite(
    check: SuiteCheck,
    spec: &ProblemSpec,
    profile: &CurvatureProfile,
    trials: usize,
    seed: u64,
) -> Result<InequalityReport> {
    if trials == 0 {
        return Err(Error::Input("a suite needs at least one trial".into()));
    }
    let anti = Antiderivative::new(profile);
    let (a, b) = spec.horizon;
    let reports = (0..trials)
        .into_par_iter()
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1 << 32 | id as u64);
            let (x, y) = (rng.random_range(a..b), rng.random_range(a..b));
            let (s, t) = if x <= y { (x, y) } else { (y, x) };
            let positive = matches!(check, SuiteCheck::PhiSobolev(phi) if phi.domain_lower().is_some());
            let f = match (id, positive) {
                (0, false) => TestFunction::affine(0.3, [1.0, -0.5]),
                (0, true) => {
                    let mut f = TestFunction::affine(0.0, [0.2, -0.1]);
                    let min = f.on_grid(&spec.grid).into_iter().fold(f64::INFINITY, f64::min);
                    f.offset = 1.0 - min;
                    f
                }
                (_, false) => TestFunction::random(&spec.grid, seed, id),
                (_, true) => TestFunction::random_positive(&spec.grid, seed, id),
            };
            let g = f.on_grid(&spec.grid);
            match check {
                SuiteCheck::Commutation => commutation_with(&g, s, t, spec, &anti, id),
                SuiteCheck::PhiSobolev(phi) => {
                    let kind = if phi == PhiFunction::Kl {
                        InequalityKind::Lsi
                    } else {
                        InequalityKind::PhiSobolev
                    };
                    phi_sobolev_with(&g, s, t, spec, &anti, phi, kind, id)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::worst_of(reports).unwrap())
}
