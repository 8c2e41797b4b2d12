//! Gaussian laws and the closed forms of the OU and heat semigroups.

use std::fmt;
use std::io::Write;

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::model::SpatialGrid;
use crate::report::csv::fmt_f64;

/// Below this |λ| the λ → 0 series are used.
pub const LAMBDA_SERIES: f64 = 1e-10;

/// Isotropic Gaussian `N(mean, variance·Id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianLaw {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::Input(format!("variance must be positive, got {variance}")));
        }
        if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Input(format!("bad mean {mean:?}")));
        }
        Ok(Self { mean, variance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        let r2: f64 = self.mean.iter().zip(x).map(|(m, x)| (x - m).powi(2)).sum();
        let d = self.dim() as f64;
        (-0.5 * r2 / self.variance).exp() / (2.0 * std::f64::consts::PI * self.variance).powf(0.5 * d)
    }

    /// Cell-centre samples, normalised to unit discrete mass.
    pub fn on_grid(&self, grid: SpatialGrid) -> Result<DensityGrid> {
        DensityGrid::gaussian(grid, &self.mean, self.variance)
    }
}

/// `(1 − e^{−2λt})/λ`, with its series near λ = 0.
pub fn ou_variance(t: f64, lambda: f64) -> f64 {
    let z = lambda * t;
    if lambda.abs() < LAMBDA_SERIES {
        2.0 * t * (1.0 - z + 2.0 / 3.0 * z * z)
    } else {
        -(-2.0 * z).exp_m1() / lambda
    }
}

/// `(e^{2λt} − 1)/λ`, with its series near λ = 0.
fn ou_growth(t: f64, lambda: f64) -> f64 {
    let z = lambda * t;
    if lambda.abs() < LAMBDA_SERIES {
        2.0 * t * (1.0 + z + 2.0 / 3.0 * z * z)
    } else {
        (2.0 * z).exp_m1() / lambda
    }
}

fn positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("time must be positive, got {t}")))
    }
}

/// Law at time `t` of `dX = −λX dt + √2 dB` started at `x`.
pub fn ou_transition(x: &[f64], t: f64, lambda: f64) -> Result<GaussianLaw> {
    positive_time(t)?;
    let decay = (-lambda * t).exp();
    GaussianLaw::new(x.iter().map(|x| x * decay).collect(), ou_variance(t, lambda))
}

/// Push a Gaussian law through the OU semigroup for a time `t`.
pub fn ou_propagate(law: &GaussianLaw, t: f64, lambda: f64) -> Result<GaussianLaw> {
    if t == 0.0 {
        return Ok(law.clone());
    }
    let step = ou_transition(&law.mean, t, lambda)?;
    GaussianLaw::new(step.mean, law.variance * (-2.0 * lambda * t).exp() + step.variance)
}

/// Relative entropy of the OU laws started at `y` and at `x`:
/// `λ|x − y|² / (2(e^{2λt} − 1))`, equal to `|x − y|²/(4t)` at λ = 0.
pub fn ou_alpha(x: &[f64], y: &[f64], t: f64, lambda: f64) -> Result<f64> {
    positive_time(t)?;
    if x.len() != y.len() {
        return Err(Error::Input("points of different dimension".into()));
    }
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(r2 / (2.0 * ou_growth(t, lambda)))
}

/// Large-time limit of [`ou_alpha`]: `−λ|x − y|²/2` for λ < 0, else 0.
pub fn ou_alpha_limit(x: &[f64], y: &[f64], lambda: f64) -> f64 {
    if lambda < 0.0 {
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        -0.5 * lambda * r2
    } else {
        0.0
    }
}

/// Long-time behaviour of [`ou_alpha`] as a function of λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ExponentialToZero,
    AlgebraicToZero,
    ExponentialToPositiveLimit,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExponentialToZero => "exponential_to_zero",
            Self::AlgebraicToZero => "algebraic_to_zero",
            Self::ExponentialToPositiveLimit => "exponential_to_positive_limit",
        })
    }
}

pub fn regime(lambda: f64) -> Regime {
    if lambda > 0.0 {
        Regime::ExponentialToZero
    } else if lambda == 0.0 {
        Regime::AlgebraicToZero
    } else {
        Regime::ExponentialToPositiveLimit
    }
}

/// `KL(p ‖ q)` for isotropic Gaussians of the same dimension.
pub fn gaussian_kl(p: &GaussianLaw, q: &GaussianLaw) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::Input("Gaussian laws of different dimension".into()));
    }
    let d = p.dim() as f64;
    let gap2: f64 = p.mean.iter().zip(&q.mean).map(|(a, b)| (a - b).powi(2)).sum();
    let r = p.variance / q.variance;
    Ok(0.5 * (d * (r - 1.0 - r.ln()) + gap2 / q.variance))
}

/// Fundamental solution of `∂ₜu = κ∂²ₓu` at time `t`: `N(0, 2κt)`.
pub fn heat_kernel(t: f64, kappa: f64) -> Result<GaussianLaw> {
    positive_time(t)?;
    if !(kappa > 0.0) {
        return Err(Error::Input(format!("kappa must be positive, got {kappa}")));
    }
    GaussianLaw::new(vec![0.0], 2.0 * kappa * t)
}

/// Gaussian log-Sobolev constant for `N(m, σ²·Id)` with `Γ = κ|∇f|²`:
/// `Ent(g) ≤ σ²/(2κ) ∫Γ(g)/g`.
pub fn gaussian_lsi_constant(variance: f64, kappa: f64) -> f64 {
    variance / (2.0 * kappa)
}

/// Reference curve `t, alpha, regime` for one λ.
pub fn write_alpha_curve(
    mut w: impl Write,
    x: &[f64],
    y: &[f64],
    lambda: f64,
    times: &[f64],
) -> Result<()> {
    writeln!(w, "t,alpha,regime")?;
    let reg = regime(lambda);
    for &t in times {
        writeln!(w, "{},{},{}", fmt_f64(t), fmt_f64(ou_alpha(x, y, t, lambda)?), reg)?;
    }
    Ok(())
}
