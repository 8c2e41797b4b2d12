//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line reaches the output.
//! A criterion listed in `KNOWN_CONFLICTS` is reported as FAIL; the run
//! still succeeds when the failure is exactly the documented one.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use entroflow::bounds::DecayEnvelope;
use entroflow::closed_forms::{gaussian_kl, gaussian_lsi_constant, ou_alpha, ou_propagate, ou_transition, GaussianLaw};
use entroflow::curvature::{estimate_rho, CurvatureProfile};
use entroflow::density::DensityGrid;
use entroflow::entropy::{phi_entropy, pinsker_gap, PhiFunction};
use entroflow::fokker_planck::{evolve, evolve_pair, AdvectionScheme};
use entroflow::model::{preset, Preset, ProblemSpec};
use entroflow::report::demo::HeatDemo;
use entroflow::sde::{empirical_density, simulate, StartLaw};
use entroflow::semigroup::{check_commutation, propagated_lsi_for, run_suite, InequalityReport, SuiteCheck};
use entroflow::testfn::TestFunction;

type Res<T> = entroflow::error::Result<T>;

struct Outcome {
    pass: bool,
    detail: String,
    /// For a known conflict: whether the failure is the documented one.
    expected_failure: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            expected_failure: false,
        }
    }
}

/// Criteria whose stated tolerance contradicts another criterion.
const KNOWN_CONFLICTS: &[(usize, &str)] = &[
    (
        2,
        "the lambda = 1 slope of log alpha is -2 whenever criterion 1 holds; -1 +- 0.01 is unattainable",
    ),
    (
        8,
        "with kappa = 1/2 the log-Sobolev constant of N(0,1) is 1, so d0 = 1/2 and d(t) = 1/2 + t are too small",
    ),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut raw_worst): (f64, f64) = (0.0, 0.0);
    let mut conditioned = true;
    let mut zero_branch = 0;
    let mut ill = 0;
    for k in 0..1000 {
        let x: f64 = rng.random_range(-5.0..5.0);
        let y: f64 = rng.random_range(-5.0..5.0);
        let t = rng.random_range(0.01..10.0);
        let lambda = match k % 10 {
            0 => 0.0,
            1 => rng.random_range(-1e-11..1e-11),
            _ => rng.random_range(-2.0..2.0),
        };
        zero_branch += usize::from(lambda == 0.0);
        let kl = gaussian_kl(&ou_transition(&[y], t, lambda)?, &ou_transition(&[x], t, lambda)?)?;
        let alpha = ou_alpha(&[x], &[y], t, lambda)?;
        let err = rel(kl, alpha);
        raw_worst = raw_worst.max(err);
        // Rounding the two transition means bounds the oracle's own
        // accuracy by 2u(|x| + |y|)/|x - y|.
        let rounding = f64::EPSILON * (x.abs() + y.abs()) / (x - y).abs();
        if rounding <= 1e-13 {
            worst = worst.max(err);
        } else {
            ill += 1;
            conditioned &= err <= 1e-12 + rounding;
        }
    }
    Ok(Outcome::new(
        worst <= 1e-12 && conditioned,
        format!(
            "1000 draws ({zero_branch} at lambda = 0): worst relative error {worst:.2e} (<= 1e-12) on {} draws; \
             {ill} near-diagonal draws within the mean-rounding bound {}; raw worst {raw_worst:.2e}",
            1000 - ill,
            word(conditioned)
        ),
    ))
}

fn log_slope(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len() as f64;
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mt = times.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = times.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    sxy / sxx
}

fn criterion_2() -> Res<Outcome> {
    let (x, y) = ([1.5], [-0.5]);
    let gap2 = 4.0;
    let times: Vec<f64> = (0..=80).map(|k| 2.0 + 0.1 * k as f64).collect();
    let alphas = times.iter().map(|&t| ou_alpha(&x, &y, t, 1.0)).collect::<Res<Vec<_>>>()?;
    let slope = log_slope(&times, &alphas);
    let slope_ok = (slope + 1.0).abs() <= 0.01;

    let mut algebraic: f64 = 0.0;
    for &t in &times {
        algebraic = algebraic.max((t * ou_alpha(&x, &y, t, 0.0)? - gap2 / 4.0).abs());
    }
    let algebraic_ok = algebraic <= 1e-10;
    let limit_err = (ou_alpha(&x, &y, 10.0, -1.0)? - gap2 / 2.0).abs();
    let limit_ok = limit_err <= 1e-3 * gap2;
    Ok(Outcome {
        pass: slope_ok && algebraic_ok && limit_ok,
        detail: format!(
            "lambda = 1 slope {slope:.5} (required -1 +- 0.01: {}); lambda = 0 max |t*alpha - (x-y)^2/4| {algebraic:.1e} ({}); \
             lambda = -1 |alpha(10) - (x-y)^2/2| {limit_err:.1e} ({})",
            word(slope_ok),
            word(algebraic_ok),
            word(limit_ok)
        ),
        expected_failure: !slope_ok && (slope + 2.0).abs() <= 0.01 && algebraic_ok && limit_ok,
    })
}

fn criterion_3() -> Res<Outcome> {
    let spec = preset(Preset::Ou { lambda: 1.0 })?;
    let u0 = DensityGrid::gaussian(spec.grid, &[1.0], 0.25)?;
    let u1 = evolve(&u0, &spec, 0.0, &[1.0], AdvectionScheme::default())?.remove(0);
    let exact = ou_propagate(&GaussianLaw::new(vec![1.0], 0.25)?, 1.0, 1.0)?.on_grid(spec.grid)?;
    let pde_err = u1.l1_distance(&exact)?;

    let start = StartLaw::Gaussian { mean: [1.0, 0.0], variance: 0.25 };
    let paths = simulate(&spec, &start, 0.0, 1.0, 100_000, 1e-3, 2024)?;
    let coarse = u1.coarsen(8)?;
    let hist = empirical_density(&paths, coarse.grid())?;
    let sde_err = hist.density.l1_distance(&coarse)?;
    Ok(Outcome::new(
        u1.grid().len() == 512 && pde_err <= 1e-2 && sde_err <= 0.05 && !hist.coverage_warning,
        format!(
            "{} cells: L1(solver, exact) {pde_err:.2e} (<= 1e-2); 1e5 paths on {} bins: L1(histogram, solver) {sde_err:.3} (<= 0.05)",
            u1.grid().len(),
            coarse.grid().len()
        ),
    ))
}

fn criterion_4() -> Res<Outcome> {
    let spec = preset(Preset::Ou { lambda: 1.0 })?;
    let u0 = DensityGrid::gaussian(spec.grid, &[1.0], 1.0)?;
    let v0 = DensityGrid::gaussian(spec.grid, &[0.0], 1.0)?;
    let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    let pair = evolve_pair(&u0, &v0, &spec, PhiFunction::Kl, &times, Some(0.5))?;
    let env = pair.envelope.clone().expect("kl with d0");
    let h0 = pair.entropy[0];
    let mut envelope_ok = true;
    let mut worst_rel: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        envelope_ok &= pair.entropy[k] <= env[k] + 0.05 * h0;
        worst_rel = worst_rel.max(rel(pair.entropy[k], (-2.0 * t).exp() / 2.0));
    }
    Ok(Outcome::new(
        envelope_ok && worst_rel <= 0.05,
        format!(
            "{} outputs on [0, 5]: envelope {}; worst relative gap to exp(-2t)/2 {worst_rel:.2e} (<= 5e-2)",
            times.len(),
            if envelope_ok { "respected" } else { "violated" }
        ),
    ))
}

fn criterion_5() -> Res<Outcome> {
    let d0 = 0.5;
    let mut worst: f64 = 0.0;
    for rho in [-0.7, -0.1, 0.0, 0.3, 1.0, 2.5] {
        let env = DecayEnvelope::new(d0, &CurvatureProfile::constant(rho, (0.0, 10.0))?)?;
        for k in 0..=100 {
            let t = 0.1 * k as f64;
            let e = (-2.0 * rho * t).exp();
            let (c_st, d, c) = if rho == 0.0 {
                (t, d0 + t, 1.0 / (1.0 + t / d0))
            } else {
                let c_st = (1.0 - e) / (2.0 * rho);
                (c_st, d0 * e + c_st, 2.0 * rho * d0 * e / (1.0 + (2.0 * rho * d0 - 1.0) * e))
            };
            if t > 0.0 {
                worst = worst.max(rel(env.c_st_from_start(t)?, c_st));
            }
            worst = worst.max(rel(env.d_t(t)?, d)).max(rel(env.c_envelope(t)?, c));
        }
    }
    Ok(Outcome::new(
        worst <= 1e-6,
        format!("rho in {{-0.7, -0.1, 0, 0.3, 1, 2.5}}, t in [0, 10]: worst relative error {worst:.2e} (<= 1e-6)"),
    ))
}

fn suite_line(r: &InequalityReport) -> String {
    format!("{} worst {:.2e} tol {:.2e}", r.kind, r.worst_residual, r.tolerance)
}

fn criterion_6() -> Res<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let ou = preset(Preset::Ou { lambda: 1.0 })?;
    let tv = preset(Preset::TimeVaryingOu { lambda0: 0.5, slope: 1.0 })?;
    for spec in [&ou, &tv] {
        let profile = estimate_rho(spec, 64)?;
        let r = run_suite(SuiteCheck::Commutation, spec, &profile, 50, 6)?;
        pass &= r.pass();
        parts.push(format!("{}: 50 trials {}", spec.name, suite_line(&r)));
    }
    let profile = estimate_rho(&ou, 64)?;
    let x: Vec<f64> = ou.grid.centers().iter().map(|p| p[0]).collect();
    let mut worst: f64 = 0.0;
    for (s, t) in [(0.0, 0.5), (0.5, 2.0), (1.0, 4.0)] {
        let r = check_commutation(&x, s, t, &ou, &profile)?;
        // both sides equal exp(-(t - s)) for g = x
        let scale = (-(t - s)).exp();
        worst = worst.max(r.worst_residual.abs() / scale);
        pass &= r.pass();
    }
    pass &= worst <= 1e-3;
    parts.push(format!("linear g on ou: relative gap {worst:.2e} (<= 1e-3)"));
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn criterion_7() -> Res<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [Preset::Ou { lambda: 1.0 }, Preset::Heat, Preset::RotatingDrift] {
        let spec = preset(p)?;
        let profile = estimate_rho(&spec, 64)?;
        for phi in [PhiFunction::Kl, PhiFunction::Variance] {
            let r = run_suite(SuiteCheck::PhiSobolev(phi), &spec, &profile, 50, 7)?;
            pass &= r.pass();
            parts.push(format!("{}/{}: {}", p.name(), phi.name(), if r.pass() { "pass" } else { "FAIL" }));
        }
    }
    let ou = preset(Preset::Ou { lambda: 1.0 })?;
    let inflated = estimate_rho(&ou, 64)?.shifted(0.5);
    let control = run_suite(SuiteCheck::PhiSobolev(PhiFunction::Kl), &ou, &inflated, 50, 7)?;
    pass &= !control.pass();
    parts.push(format!(
        "control rho + 0.5 on ou: {} ({})",
        if control.pass() { "not falsified" } else { "falsified" },
        suite_line(&control)
    ));
    Ok(Outcome::new(pass, format!("50 trials each; {}", parts.join(", "))))
}

fn heat_lsi(spec: &ProblemSpec, v0: &DensityGrid, d0: f64, t: f64, f: &[Vec<f64>]) -> Res<InequalityReport> {
    let profile = estimate_rho(spec, 64)?;
    propagated_lsi_for(spec, v0, d0, t, f, &profile)
}

fn criterion_8() -> Res<Outcome> {
    let spec = preset(Preset::Heat)?;
    let v0 = DensityGrid::gaussian(spec.grid, &[0.0], 1.0)?;
    let d0 = 0.5;
    let profile = estimate_rho(&spec, 64)?;
    let env = DecayEnvelope::new(d0, &profile)?;
    let mut pass = true;
    let mut expected = true;
    let mut parts = Vec::new();
    let random: Vec<Vec<f64>> = (0..20)
        .map(|id| TestFunction::random_positive(&spec.grid, 8, id).on_grid(&spec.grid))
        .collect();
    for t in [0.5, 1.0, 2.0] {
        let d_ok = (env.d_t(t)? - (0.5 + t)).abs() <= 1e-9;
        let r = heat_lsi(&spec, &v0, d0, t, &random)?;
        pass &= d_ok && r.pass();
        expected &= d_ok;
        parts.push(format!(
            "t = {t}: d = {:.6} {}, 20 f {}",
            env.d_t(t)?,
            if d_ok { "ok" } else { "wrong" },
            if r.pass() { "pass" } else { "FAIL" }
        ));
    }
    // The same functions against d0 = sigma^2/(2 kappa), the Gaussian
    // constant for this Gamma.
    let gaussian_d0 = gaussian_lsi_constant(1.0, spec.diffusion.kappa(0.0));
    let mut gaussian_ok = true;
    for t in [0.5, 1.0, 2.0] {
        gaussian_ok &= heat_lsi(&spec, &v0, gaussian_d0, t, &random)?.pass();
    }
    parts.push(format!("same functions with d0 = {gaussian_d0}: {}", if gaussian_ok { "pass" } else { "FAIL" }));
    expected &= gaussian_ok;
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
        expected_failure: !pass && expected,
    })
}

fn criterion_9() -> Res<Outcome> {
    let demo = HeatDemo::run()?;
    let r = &demo.report;
    let strict = r.entropy_strictly_decreasing();
    let l1 = r.final_l1();
    let (a, b) = demo.identity;
    let identity = (a - b).abs();
    Ok(Outcome::new(
        strict && l1 <= 0.05 && identity <= 1e-3,
        format!(
            "two bumps, t in [1, 50]: entropy strictly decreasing {}; final L1 {l1:.3e} (<= 0.05); \
             change of variables gap {identity:.1e} (<= 1e-3)",
            if strict { "yes" } else { "no" }
        ),
    ))
}

fn all_presets() -> [Preset; 4] {
    [
        Preset::Ou { lambda: 1.0 },
        Preset::Heat,
        Preset::RotatingDrift,
        Preset::TimeVaryingOu { lambda0: 0.5, slope: 1.0 },
    ]
}

fn random_mixture(rng: &mut ChaCha8Rng, d: usize) -> Vec<(f64, Vec<f64>, f64)> {
    (0..rng.random_range(1..4))
        .map(|_| {
            let m = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            (rng.random_range(0.1..1.0), m, rng.random_range(0.2..1.5))
        })
        .collect()
}

fn criterion_10() -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut parts = Vec::new();

    let mut mass_rate: f64 = 0.0;
    let mut positive = true;
    let mut monotone = true;
    for p in all_presets() {
        let spec = preset(p)?;
        let d = spec.dim();
        let u0 = DensityGrid::gaussian_mixture(spec.grid, &random_mixture(&mut rng, d))?;
        let v0 = DensityGrid::gaussian(spec.grid, &vec![0.0; d], 1.0)?;
        let span = spec.horizon.1.min(2.0);
        let times: Vec<f64> = (0..=8).map(|k| span * k as f64 / 8.0).collect();
        for phi in PhiFunction::builtins() {
            let pair = evolve_pair(&u0, &v0, &spec, phi, &times, None)?;
            mass_rate = mass_rate.max(pair.max_mass_drift() / span);
            monotone &= pair.max_entropy_increase() <= 1e-10 * pair.entropy[0].abs().max(1.0);
            if phi == PhiFunction::Kl {
                let states = evolve(&u0, &spec, 0.0, &times[1..], AdvectionScheme::default())?;
                positive &= states.iter().all(|u| u.values().iter().all(|&x| x >= 0.0));
            }
        }
    }
    parts.push(format!("mass drift {mass_rate:.1e} per unit time (<= 1e-8)"));
    parts.push(format!("positivity {}", word(positive)));
    parts.push(format!("entropy monotone for every builtin phi and preset {}", word(monotone)));

    let grid = entroflow::model::SpatialGrid::new_1d(-12.0, 12.0, 256)?;
    let mut pinsker = true;
    let mut jensen = true;
    for k in 0..100 {
        let u = DensityGrid::gaussian_mixture(grid, &random_mixture(&mut rng, 1))?;
        let v = DensityGrid::gaussian_mixture(grid, &random_mixture(&mut rng, 1))?;
        let (kl, half_l1_sq) = pinsker_gap(&u, &v)?;
        pinsker &= half_l1_sq <= kl + 1e-12;
        let f = TestFunction::random_positive(&grid, 10, k).on_grid(&grid);
        for phi in PhiFunction::builtins() {
            jensen &= phi_entropy(&u, &f, phi)? >= -1e-12;
        }
    }
    parts.push(format!("Pinsker on 100 pairs {}", word(pinsker)));
    parts.push(format!("Jensen nonnegativity {}", word(jensen)));
    Ok(Outcome::new(
        mass_rate <= 1e-8 && positive && monotone && pinsker && jensen,
        parts.join("; "),
    ))
}

fn word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Res<Outcome>); 10] = [
        ("OU closed-form identity", criterion_1),
        ("three OU regimes", criterion_2),
        ("solver and SDE against the OU oracle", criterion_3),
        ("entropy decay envelope", criterion_4),
        ("constant-rho bound formulas", criterion_5),
        ("commutation bound", criterion_6),
        ("local phi-Sobolev and log-Sobolev", criterion_7),
        ("log-Sobolev propagation on heat", criterion_8),
        ("intermediate asymptotics", criterion_9),
        ("structural invariants", criterion_10),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let conflict = KNOWN_CONFLICTS.iter().find(|(c, _)| *c == id);
        println!(
            "criterion {id:>2} {} {name} [{secs:.1}s]: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        match (outcome.pass, conflict) {
            (true, _) => {}
            (false, Some((_, why))) if outcome.expected_failure => {
                println!("             documented conflict: {why}");
            }
            (false, _) => unexpected += 1,
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed outside the documented conflicts");
        ExitCode::FAILURE
    }
}
