//! Scenario files.
//!
//! ```toml
//! schema = 1
//! name = "ou-decay"
//! seed = 7
//! phi = "kl"
//! d0 = 0.5
//! times = [0.0, 0.5, 1.0, 2.0]
//!
//! [preset]
//! name = "ou"
//! lambda = 1.0
//!
//! [u0]
//! kind = "gaussian"
//! mean = [1.0]
//! variance = 1.0
//!
//! [v0]
//! kind = "gaussian"
//! mean = [0.0]
//! variance = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::closed_forms::gaussian_lsi_constant;
use crate::density::DensityGrid;
use crate::entropy::PhiFunction;
use crate::error::{Error, Result};
use crate::fokker_planck::AdvectionScheme;
use crate::model::{preset, time_varying_ou, Preset, ProblemSpec, SpatialGrid};

/// The only schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_phi")]
    pub phi: String,
    /// Initial log-Sobolev constant of `v0`. Derived as `σ²/(2κ)` for a
    /// Gaussian `v0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    /// Output times; the first and last set the horizon.
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Added to the estimated curvature. A positive shift should make
    /// the checks fail.
    #[serde(default)]
    pub rho_shift: f64,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    pub preset: PresetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    pub u0: InitialData,
    pub v0: InitialData,
    #[serde(default)]
    pub checks: ChecksConfig,
}

fn default_phi() -> String {
    "kl".into()
}

fn default_scheme() -> String {
    "exponential_fitting".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub name: String,
    /// Rate of `ou`, initial rate of `time_varying_ou`.
    #[serde(default = "one")]
    pub lambda: f64,
    /// `λ(t) = lambda + slope·t` for `time_varying_ou`.
    #[serde(default)]
    pub slope: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Gaussian { mean: Vec<f64>, variance: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

impl InitialData {
    pub fn on_grid(&self, grid: SpatialGrid) -> Result<DensityGrid> {
        match self {
            Self::Gaussian { mean, variance } => DensityGrid::gaussian(grid, mean, *variance),
            Self::Mixture { components } => {
                let parts: Vec<_> = components
                    .iter()
                    .map(|c| (c.weight, c.mean.clone(), c.variance))
                    .collect();
                DensityGrid::gaussian_mixture(grid, &parts)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    /// Pointwise curvature criterion with the estimated profile.
    #[serde(default = "yes")]
    pub criterion: bool,
    #[serde(default = "yes")]
    pub commutation: bool,
    /// Local Φ-Sobolev inequality for the configured Φ.
    #[serde(default = "yes")]
    pub phi_sobolev: bool,
    /// Log-Sobolev inequality for `v(t)` with constant `d(t)`.
    #[serde(default)]
    pub propagated_lsi: bool,
    /// Entropy envelope along the orbit pair (kl only).
    #[serde(default = "yes")]
    pub envelope: bool,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_rho_samples")]
    pub rho_samples: usize,
}

fn yes() -> bool {
    true
}

fn default_trials() -> usize {
    20
}

fn default_rho_samples() -> usize {
    64
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            criterion: true,
            commutation: true,
            phi_sobolev: true,
            propagated_lsi: false,
            envelope: true,
            trials: default_trials(),
            rho_samples: default_rho_samples(),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        match raw.get("schema").and_then(|v| v.as_integer()) {
            Some(v) if v == SCHEMA_VERSION as i64 => {}
            Some(v) => return Err(Error::Config(format!("unsupported schema version {v}"))),
            None => return Err(Error::Config("missing integer `schema` field".into())),
        }
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn phi_function(&self) -> Result<PhiFunction> {
        PhiFunction::from_name(&self.phi).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn advection_scheme(&self) -> Result<AdvectionScheme> {
        AdvectionScheme::from_name(&self.scheme).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn horizon(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn validate(&self) -> Result<()> {
        self.phi_function()?;
        self.advection_scheme()?;
        Preset::from_name(&self.preset.name, self.preset.lambda, self.preset.slope)?;
        if self.times.len() < 2 {
            return Err(Error::Config("`times` needs at least two entries".into()));
        }
        if self.times.iter().any(|t| !t.is_finite()) || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("`times` must be finite and strictly increasing".into()));
        }
        if let Some(d0) = self.d0 {
            if !(d0 > 0.0) || !d0.is_finite() {
                return Err(Error::Config(format!("d0 must be positive, got {d0}")));
            }
        }
        if !self.rho_shift.is_finite() {
            return Err(Error::Config("rho_shift must be finite".into()));
        }
        if self.checks.trials == 0 || self.checks.rho_samples < 16 {
            return Err(Error::Config("checks need trials >= 1 and rho_samples >= 16".into()));
        }
        if let Some(g) = &self.grid {
            let d = g.lower.len();
            if !(1..=2).contains(&d) || g.upper.len() != d || g.cells.len() != d {
                return Err(Error::Config("grid lower/upper/cells must share a length of 1 or 2".into()));
            }
        }
        for (label, data) in [("u0", &self.u0), ("v0", &self.v0)] {
            let ok = match data {
                InitialData::Gaussian { variance, .. } => *variance > 0.0,
                InitialData::Mixture { components } => {
                    !components.is_empty() && components.iter().all(|c| c.variance > 0.0 && c.weight >= 0.0)
                }
            };
            if !ok {
                return Err(Error::Config(format!("{label}: variances must be positive, weights nonnegative")));
            }
        }
        Ok(())
    }

    /// Preset with the configured horizon and grid.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let p = Preset::from_name(&self.preset.name, self.preset.lambda, self.preset.slope)?;
        let horizon = self.horizon();
        let spec = match p {
            Preset::TimeVaryingOu { lambda0, slope } => time_varying_ou(move |t| lambda0 + slope * t, horizon)?,
            other => preset(other)?.with_horizon(horizon)?,
        };
        let spec = match &self.grid {
            None => spec,
            Some(g) => {
                let grid = if g.lower.len() == 1 {
                    SpatialGrid::new_1d(g.lower[0], g.upper[0], g.cells[0])
                } else {
                    SpatialGrid::new_2d([g.lower[0], g.lower[1]], [g.upper[0], g.upper[1]], [g.cells[0], g.cells[1]])
                }
                .map_err(|e| Error::Config(e.to_string()))?;
                spec.with_grid(grid)?
            }
        };
        Ok(spec)
    }

    /// Configured `d0`, or `σ²/(2κ(t₀))` for a Gaussian `v0`.
    pub fn initial_lsi_constant(&self, spec: &ProblemSpec) -> Option<f64> {
        self.d0.or(match &self.v0 {
            InitialData::Gaussian { variance, .. } => {
                Some(gaussian_lsi_constant(*variance, spec.diffusion.kappa(spec.horizon.0)))
            }
            InitialData::Mixture { .. } => None,
        })
    }

    /// Densities of `u0` and `v0` on the grid of `spec`.
    pub fn initial_densities(&self, spec: &ProblemSpec) -> Result<(DensityGrid, DensityGrid)> {
        let dim = spec.dim();
        for (label, data) in [("u0", &self.u0), ("v0", &self.v0)] {
            let bad = match data {
                InitialData::Gaussian { mean, .. } => mean.len() != dim,
                InitialData::Mixture { components } => components.iter().any(|c| c.mean.len() != dim),
            };
            if bad {
                return Err(Error::Config(format!("{label}: mean must have {dim} entries")));
            }
        }
        let conv = |e: Error| Error::Config(e.to_string());
        Ok((
            self.u0.on_grid(spec.grid).map_err(conv)?,
            self.v0.on_grid(spec.grid).map_err(conv)?,
        ))
    }
}
