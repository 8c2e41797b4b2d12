//! Scenario pipeline: curvature, bounds, orbit pair and inequality suites,
//! with CSV outputs and a `summary.toml` written on every exit path.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bounds::DecayEnvelope;
use crate::curvature::{estimate_rho, verify_criterion, CurvatureProfile};
use crate::error::{Error, Result};
use crate::fokker_planck::{evolve_pair_with, ForwardOptions};
use crate::model::ProblemSpec;
use crate::semigroup::{check_propagated_lsi_with, run_suite, write_reports_csv, InequalityReport, SuiteCheck};

use super::config::{ScenarioConfig, SCHEMA_VERSION};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass,
    Falsified,
    BadConfig,
    Divergence,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Falsified => 1,
            Self::BadConfig => 2,
            Self::Divergence => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Falsified => "falsified",
            Self::BadConfig => "bad_config",
            Self::Divergence => "divergence",
        }
    }

    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::StepSize { .. } | Error::Divergence { .. } | Error::Evaluation { .. } => Self::Divergence,
            _ => Self::BadConfig,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn from_report(name: &str, r: &InequalityReport) -> Self {
        Self {
            name: name.into(),
            pass: r.pass(),
            worst_residual: r.worst_residual,
            tolerance: r.tolerance,
            detail: format!(
                "{} trials; worst at test {} s = {} t = {} x = {:?}",
                r.trials, r.witness.test_id, r.witness.s, r.witness.t, r.witness.point
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub schema: u32,
    pub seed: u64,
    pub status: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<String>,
    pub checks: Vec<CheckOutcome>,
}

impl Summary {
    fn new(config: &ScenarioConfig) -> Self {
        Self {
            scenario: config.name.clone(),
            schema: SCHEMA_VERSION,
            seed: config.seed,
            status: String::new(),
            exit_code: 0,
            error: None,
            files: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Which parts of the pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub curvature: bool,
    pub bounds: bool,
    pub orbit: bool,
    pub inequalities: bool,
}

impl Stages {
    pub const ALL: Self = Self {
        curvature: true,
        bounds: true,
        orbit: true,
        inequalities: true,
    };
    pub const CURVATURE: Self = Self {
        curvature: true,
        bounds: false,
        orbit: false,
        inequalities: false,
    };
    pub const BOUNDS: Self = Self {
        curvature: false,
        bounds: true,
        orbit: false,
        inequalities: false,
    };
    pub const CHECK: Self = Self {
        curvature: false,
        bounds: false,
        orbit: false,
        inequalities: true,
    };
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub status: ExitStatus,
    pub summary: Summary,
    pub out_dir: PathBuf,
}

/// Output directory: the override, else the configured one, else
/// `entroflow-out/<name>`.
pub fn output_dir(config: &ScenarioConfig, override_dir: Option<&Path>) -> PathBuf {
    match (override_dir, &config.output_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => p.clone(),
        (None, None) => Path::new("entroflow-out").join(&config.name),
    }
}

pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> ScenarioOutcome {
    run_stages(config, out_dir, Stages::ALL)
}

/// Run the selected stages. Numerical failures become exit statuses and
/// the summary is still written.
pub fn run_stages(config: &ScenarioConfig, out_dir: &Path, stages: Stages) -> ScenarioOutcome {
    let mut summary = Summary::new(config);
    let result = fs::create_dir_all(out_dir)
        .map_err(Error::from)
        .and_then(|_| pipeline(config, out_dir, stages, &mut summary));
    let status = match &result {
        Ok(()) if summary.checks.iter().all(|c| c.pass) => ExitStatus::Pass,
        Ok(()) => ExitStatus::Falsified,
        Err(e) => {
            summary.error = Some(e.to_string());
            ExitStatus::from_error(e)
        }
    };
    summary.status = status.label().into();
    summary.exit_code = status.code();
    if let Err(e) = write_summary(&summary, out_dir) {
        summary.error.get_or_insert_with(|| format!("summary not written: {e}"));
    }
    ScenarioOutcome {
        status,
        summary,
        out_dir: out_dir.to_path_buf(),
    }
}

fn write_summary(summary: &Summary, out_dir: &Path) -> Result<()> {
    let text = toml::to_string(summary).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(out_dir.join("summary.toml"), text)?;
    Ok(())
}

fn create(out_dir: &Path, name: &str, summary: &mut Summary) -> Result<BufWriter<File>> {
    summary.files.push(name.into());
    Ok(BufWriter::new(File::create(out_dir.join(name))?))
}

fn profile_for(config: &ScenarioConfig, spec: &ProblemSpec) -> Result<CurvatureProfile> {
    let estimate = estimate_rho(spec, config.checks.rho_samples)?;
    Ok(if config.rho_shift == 0.0 {
        estimate
    } else {
        estimate.shifted(config.rho_shift)
    })
}

fn pipeline(config: &ScenarioConfig, out_dir: &Path, stages: Stages, summary: &mut Summary) -> Result<()> {
    config.validate()?;
    let spec = config.problem()?;
    let phi = config.phi_function()?;
    let (u0, v0) = config.initial_densities(&spec)?;
    let d0 = config.initial_lsi_constant(&spec);
    let checks = &config.checks;

    let profile = profile_for(config, &spec)?;
    if stages.curvature || stages.orbit {
        profile.write_csv(create(out_dir, "curvature.csv", summary)?)?;
    }
    if stages.curvature && checks.criterion {
        let r = verify_criterion(&profile, &spec, checks.trials, config.seed)?;
        summary.checks.push(CheckOutcome {
            name: "curvature_criterion".into(),
            pass: r.pass,
            worst_residual: r.worst_residual,
            tolerance: r.tolerance,
            detail: format!(
                "{} trials; worst at test {} t = {} x = {:?}",
                r.trials, r.witness_trial, r.witness_t, r.witness_x
            ),
        });
    }

    if stages.bounds {
        let d0 = d0.ok_or_else(|| Error::Config("bounds need d0 (or a Gaussian v0)".into()))?;
        let envelope = DecayEnvelope::new(d0, &profile)?;
        envelope.write_csv(create(out_dir, "bounds.csv", summary)?, &config.times)?;
    }

    if stages.orbit {
        let options = ForwardOptions {
            scheme: config.advection_scheme()?,
            profile: Some(profile.clone()),
            keep_densities: false,
        };
        let envelope_d0 = if checks.envelope { d0 } else { None };
        let pair = evolve_pair_with(&u0, &v0, &spec, phi, &config.times, envelope_d0, &options)?;
        pair.write_csv(create(out_dir, "orbit.csv", summary)?)?;
        let h0 = pair.entropy[0];
        let rise_tol = 1e-8 * h0.abs().max(1e-12);
        let rise = pair.max_entropy_increase().max(0.0);
        summary.checks.push(CheckOutcome {
            name: "entropy_monotone".into(),
            pass: rise <= rise_tol,
            worst_residual: -rise,
            tolerance: rise_tol,
            detail: format!("{} outputs, {} steps", pair.times.len(), pair.steps),
        });
        let span = spec.horizon.1 - spec.horizon.0;
        let drift = pair.max_mass_drift();
        summary.checks.push(CheckOutcome {
            name: "mass_conservation".into(),
            pass: drift <= 1e-8 * span,
            worst_residual: -drift,
            tolerance: 1e-8 * span,
            detail: "largest |mass(t) - mass(t0)| of either orbit".into(),
        });
        if let Some(env) = &pair.envelope {
            let (k, gap) = pair
                .entropy
                .iter()
                .zip(env)
                .map(|(h, e)| e + 0.05 * h0 - h)
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0, 0.0));
            summary.checks.push(CheckOutcome {
                name: "entropy_envelope".into(),
                pass: !pair.falsified(),
                worst_residual: gap,
                tolerance: 0.0,
                detail: format!("H(t) <= H(0)c(t) + 5% H(0); tightest at t = {}", pair.times[k]),
            });
        }
    }

    if stages.inequalities {
        let mut reports = Vec::new();
        if checks.commutation {
            let r = run_suite(SuiteCheck::Commutation, &spec, &profile, checks.trials, config.seed)?;
            summary.checks.push(CheckOutcome::from_report("commutation", &r));
            reports.push(r);
        }
        if checks.phi_sobolev {
            if phi.bivariate_convex() {
                let r = run_suite(SuiteCheck::PhiSobolev(phi), &spec, &profile, checks.trials, config.seed)?;
                summary.checks.push(CheckOutcome::from_report(&r.kind.to_string(), &r));
                reports.push(r);
            } else {
                summary.checks.push(CheckOutcome {
                    name: "phi_sobolev".into(),
                    pass: true,
                    worst_residual: f64::NAN,
                    tolerance: f64::NAN,
                    detail: format!("skipped: {} is not bivariate convex", phi.name()),
                });
            }
        }
        if checks.propagated_lsi {
            let d0 = d0.ok_or_else(|| Error::Config("propagated_lsi needs d0 (or a Gaussian v0)".into()))?;
            for &t in &config.times[1..] {
                let r = check_propagated_lsi_with(&spec, &v0, d0, t, checks.trials, config.seed, &profile)?;
                summary.checks.push(CheckOutcome::from_report(&format!("propagated_lsi@{t}"), &r));
                reports.push(r);
            }
        }
        write_reports_csv(create(out_dir, "inequalities.csv", summary)?, &reports)?;
    }
    Ok(())
}
