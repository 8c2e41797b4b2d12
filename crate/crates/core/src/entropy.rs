//! Φ-entropies, relative entropies and the entropy-production integral.

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::stencil;

/// Values of `v` below this are treated as zero.
pub const RATIO_FLOOR: f64 = 1e-300;

/// Mass tolerance for the probability-density preconditions.
pub const MASS_TOL: f64 = 1e-6;

/// Convex function Φ with derivatives up to second order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiFunction {
    /// `z log z` on `[0, ∞)`.
    Kl,
    /// `z²` on ℝ.
    Variance,
    /// `(z^p − 1 − p(z − 1)) / (p(p − 1))` on `[0, ∞)`, `p ∈ (1, 2]`.
    Power(f64),
}

impl PhiFunction {
    pub fn power(p: f64) -> Result<Self> {
        if p > 1.0 && p <= 2.0 {
            Ok(Self::Power(p))
        } else {
            Err(Error::Config(format!("power entropy needs p in (1, 2], got {p}")))
        }
    }

    /// Parse `kl`, `variance` or `power:<p>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "kl" => Ok(Self::Kl),
            "variance" => Ok(Self::Variance),
            _ => match name.strip_prefix("power:").or_else(|| name.strip_prefix("power")) {
                Some(p) => {
                    let p: f64 = p
                        .trim_start_matches(['(', ':'])
                        .trim_end_matches(')')
                        .parse()
                        .map_err(|_| Error::Config(format!("bad power entropy `{name}`")))?;
                    Self::power(p)
                }
                None => Err(Error::Config(format!("unknown entropy `{name}`"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Kl => "kl".into(),
            Self::Variance => "variance".into(),
            Self::Power(p) => format!("power:{p}"),
        }
    }

    pub fn builtins() -> [PhiFunction; 3] {
        [Self::Kl, Self::Variance, Self::Power(1.5)]
    }

    fn label(&self) -> &'static str {
        match self {
            Self::Kl => "kl",
            Self::Variance => "variance",
            Self::Power(_) => "power",
        }
    }

    /// Closed lower end of the domain 𝓘, if any.
    pub fn domain_lower(&self) -> Option<f64> {
        match self {
            Self::Variance => None,
            Self::Kl | Self::Power(_) => Some(0.0),
        }
    }

    pub fn in_domain(&self, z: f64) -> bool {
        z.is_finite() && self.domain_lower().is_none_or(|lo| z >= lo)
    }

    pub fn phi(&self, z: f64) -> f64 {
        match *self {
            Self::Kl => {
                if z > 0.0 {
                    z * z.ln()
                } else {
                    0.0
                }
            }
            Self::Variance => z * z,
            Self::Power(p) => (z.powf(p) - 1.0 - p * (z - 1.0)) / (p * (p - 1.0)),
        }
    }

    pub fn phi_prime(&self, z: f64) -> f64 {
        match *self {
            Self::Kl => z.ln() + 1.0,
            Self::Variance => 2.0 * z,
            Self::Power(p) => (z.powf(p - 1.0) - 1.0) / (p - 1.0),
        }
    }

    pub fn phi_second(&self, z: f64) -> f64 {
        match *self {
            Self::Kl => 1.0 / z,
            Self::Variance => 2.0,
            Self::Power(p) => z.powf(p - 2.0),
        }
    }

    /// Whether `(u, v) ↦ Φ″(u)v²` is nonnegative and convex on 𝓘×𝓘.
    pub fn bivariate_convex(&self) -> bool {
        match *self {
            Self::Kl | Self::Variance => true,
            Self::Power(p) => p > 1.0 && p <= 2.0,
        }
    }

    fn check_domain(&self, f: &[f64]) -> Result<()> {
        match f.iter().position(|&z| !self.in_domain(z)) {
            Some(cell) => Err(Error::Domain {
                phi: self.label(),
                cell,
                value: f[cell],
            }),
            None => Ok(()),
        }
    }
}

/// `∫Φ(f)dμ − Φ(∫f dμ)` for a probability density `mu`.
pub fn phi_entropy(mu: &DensityGrid, f: &[f64], phi: PhiFunction) -> Result<f64> {
    if f.len() != mu.values().len() {
        return Err(Error::Input("test function and measure differ in length".into()));
    }
    let mass = mu.mass();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::Input(format!("measure has mass {mass}, expected 1")));
    }
    phi.check_domain(f)?;
    let phis: Vec<f64> = f.iter().map(|&z| phi.phi(z)).collect();
    Ok(mu.integrate(&phis) - phi.phi(mu.integrate(f)))
}

fn check_pair(u: &DensityGrid, v: &DensityGrid) -> Result<()> {
    u.same_grid(v)?;
    let (mu, mv) = (u.mass(), v.mass());
    if (mu - mv).abs() > MASS_TOL {
        return Err(Error::Input(format!("mass mismatch: {mu} vs {mv}")));
    }
    Ok(())
}

/// `∫ v Φ(u/v) dx` by cell sums.
pub fn relative_entropy(u: &DensityGrid, v: &DensityGrid, phi: PhiFunction) -> Result<f64> {
    check_pair(u, v)?;
    let vol = u.grid().cell_volume();
    let u_floor = 1e-30 / vol;
    let phi0 = phi.phi(0.0);
    let mut sum = 0.0;
    for (cell, (&a, &b)) in u.values().iter().zip(v.values()).enumerate() {
        if a < u_floor {
            sum += b * phi0;
        } else if b < RATIO_FLOOR {
            return Err(Error::SingularSupport { cell, u: a });
        } else {
            sum += b * phi.phi(a / b);
        }
    }
    Ok(sum * vol)
}

/// Both sides of Pinsker's inequality: `(H(u|v), ½‖u − v‖₁²)`.
pub fn pinsker_gap(u: &DensityGrid, v: &DensityGrid) -> Result<(f64, f64)> {
    let kl = relative_entropy(u, v, PhiFunction::Kl)?;
    let l1 = u.l1_distance(v)?;
    Ok((kl, 0.5 * l1 * l1))
}

/// Entropy production with a conditioning flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipation {
    pub value: f64,
    /// Fraction of the mass of `u` sitting in floored cells.
    pub floored_mass: f64,
    /// Set when flooring touched more than 1% of the mass.
    pub ill_conditioned: bool,
}

/// `−∫Φ″(u/v) κ(t)|∇(u/v)|² v dx`.
///
/// For the kl entropy the integrand is evaluated as `u κ|∇ log(u/v)|²`,
/// which is the same quantity with a smoother ratio.
pub fn dissipation(
    u: &DensityGrid,
    v: &DensityGrid,
    phi: PhiFunction,
    t: f64,
    spec: &ProblemSpec,
) -> Result<Dissipation> {
    u.same_grid(v)?;
    let grid = u.grid();
    if grid.dim() != spec.dim() {
        return Err(Error::Input("density and problem dimensions differ".into()));
    }
    let vol = grid.cell_volume();
    let u_floor = 1e-30 / vol;
    let kappa = spec.diffusion.kappa(t);
    let n = grid.len();
    let mut live = vec![true; n];
    let mut floored = 0.0;
    let ratio: Vec<f64> = u
        .values()
        .iter()
        .zip(v.values())
        .enumerate()
        .map(|(k, (&a, &b))| {
            if a < u_floor || b < RATIO_FLOOR {
                live[k] = false;
                floored += a * vol;
            }
            a.max(u_floor) / b.max(RATIO_FLOOR)
        })
        .collect();
    let mass = u.mass();
    let floored_mass = if mass > 0.0 { floored / mass } else { 0.0 };

    let field: Vec<f64> = match phi {
        PhiFunction::Kl => ratio.iter().map(|r| r.ln()).collect(),
        _ => ratio.clone(),
    };
    let grads = stencil::gradient(&field, grid);
    let mut sum = 0.0;
    for k in 0..n {
        if !live[k] {
            continue;
        }
        let g2: f64 = grads.iter().map(|g| g[k] * g[k]).sum();
        sum += match phi {
            PhiFunction::Kl => u.values()[k] * g2,
            _ => phi.phi_second(ratio[k]) * g2 * v.values()[k],
        };
    }
    Ok(Dissipation {
        value: -kappa * sum * vol,
        floored_mass,
        ill_conditioned: floored_mass > 0.01,
    })
}
