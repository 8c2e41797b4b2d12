//! Log-Sobolev constants `c(s, t)`, the propagated constant `d(t)` and the
//! decay envelope `c(t)` for a curvature profile.

use std::io::Write;

use crate::curvature::CurvatureProfile;
use crate::error::{Error, Result};
use crate::report::csv::fmt_f64;

/// Intervals of the antiderivative grid.
pub const ANTIDERIVATIVE_NODES: usize = 4096;

/// Simpson panels used for a standalone `c(s, t)`.
const C_ST_PANELS: usize = 2048;

/// Below this |ρ| the constant-ρ closed forms switch to series.
pub const RHO_SERIES: f64 = 1e-10;

/// `R(t) = ∫ρ` from the start of the profile, tabulated by Simpson.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    profile: CurvatureProfile,
    t0: f64,
    step: f64,
    values: Vec<f64>,
}

impl Antiderivative {
    pub fn new(profile: &CurvatureProfile) -> Self {
        let (t0, t1) = profile.horizon();
        let step = (t1 - t0) / ANTIDERIVATIVE_NODES as f64;
        let mut values = Vec::with_capacity(ANTIDERIVATIVE_NODES + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for k in 0..ANTIDERIVATIVE_NODES {
            let a = t0 + k as f64 * step;
            acc += simpson_panel(|t| profile.rho(t), a, a + step);
            values.push(acc);
        }
        Self {
            profile: profile.clone(),
            t0,
            step,
            values,
        }
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }

    /// `∫_{t0}^t ρ`.
    pub fn at(&self, t: f64) -> f64 {
        let x = ((t - self.t0) / self.step).clamp(0.0, ANTIDERIVATIVE_NODES as f64);
        let k = (x.floor() as usize).min(ANTIDERIVATIVE_NODES - 1);
        let a = self.t0 + k as f64 * self.step;
        self.values[k] + simpson_panel(|s| self.profile.rho(s), a, t)
    }

    fn check(&self, s: f64, t: f64) -> Result<()> {
        if s > t {
            return Err(Error::Input(format!("c(s, t) needs s <= t, got s = {s}, t = {t}")));
        }
        if !self.profile.covers(s, t) {
            let (a, b) = self.profile.horizon();
            return Err(Error::Input(format!("[{s}, {t}] is outside the profile support [{a}, {b}]")));
        }
        Ok(())
    }

    /// `c(s, t) = ∫ₛᵗ exp(−2(R(t) − R(τ))) dτ` by composite Simpson.
    pub fn c_st(&self, s: f64, t: f64) -> Result<f64> {
        self.check(s, t)?;
        Ok(self.c_st_panels(s, t, C_ST_PANELS))
    }

    fn c_st_panels(&self, s: f64, t: f64, panels: usize) -> f64 {
        if t == s {
            return 0.0;
        }
        let rt = self.at(t);
        let h = (t - s) / panels as f64;
        (0..panels)
            .map(|k| {
                let a = s + k as f64 * h;
                simpson_panel(|tau| (-2.0 * (rt - self.at(tau))).exp(), a, a + h)
            })
            .sum()
    }

    /// `exp(−2∫ₛᵗρ)`.
    pub fn decay_factor(&self, s: f64, t: f64) -> f64 {
        (-2.0 * (self.at(t) - self.at(s))).exp()
    }

    /// `exp(−∫ₛᵗρ)`, the gradient contraction factor.
    pub fn gradient_factor(&self, s: f64, t: f64) -> f64 {
        (-(self.at(t) - self.at(s))).exp()
    }
}

fn simpson_panel(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b == a {
        return 0.0;
    }
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

/// Standalone `c(s, t)` for a profile.
pub fn c_st(s: f64, t: f64, profile: &CurvatureProfile) -> Result<f64> {
    Antiderivative::new(profile).c_st(s, t)
}

/// `d(t)` and `c(t)` for an initial constant `d0`, tabulated once.
#[derive(Debug, Clone)]
pub struct DecayEnvelope {
    d0: f64,
    anti: Antiderivative,
    /// `d` at the half nodes of the antiderivative grid.
    d_half: Vec<f64>,
    /// `∫₀ᵗ 1/d` at the full nodes.
    inv_integral: Vec<f64>,
}

impl DecayEnvelope {
    pub fn new(d0: f64, profile: &CurvatureProfile) -> Result<Self> {
        if !(d0 > 0.0) || !d0.is_finite() {
            return Err(Error::Input(format!("d0 must be positive, got {d0}")));
        }
        let anti = Antiderivative::new(profile);
        let half = 0.5 * anti.step;
        let mut d_half = Vec::with_capacity(2 * ANTIDERIVATIVE_NODES + 1);
        d_half.push(d0);
        for j in 0..2 * ANTIDERIVATIVE_NODES {
            let a = anti.t0 + j as f64 * half;
            let b = a + half;
            let prev = d_half[j];
            d_half.push(anti.decay_factor(a, b) * prev + anti.c_st_panels(a, b, 1));
        }
        if let Some(bad) = d_half.iter().find(|d| !(**d > 0.0)) {
            return Err(Error::Divergence {
                step: 0,
                t: anti.t0,
                what: format!("d(t) = {bad} is not positive"),
            });
        }
        let mut inv_integral = Vec::with_capacity(ANTIDERIVATIVE_NODES + 1);
        inv_integral.push(0.0);
        for k in 0..ANTIDERIVATIVE_NODES {
            let i = 2 * k;
            let panel = anti.step / 6.0 * (1.0 / d_half[i] + 4.0 / d_half[i + 1] + 1.0 / d_half[i + 2]);
            inv_integral.push(inv_integral[k] + panel);
        }
        Ok(Self {
            d0,
            anti,
            d_half,
            inv_integral,
        })
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn profile(&self) -> &CurvatureProfile {
        self.anti.profile()
    }

    pub fn antiderivative(&self) -> &Antiderivative {
        &self.anti
    }

    fn node_below(&self, t: f64) -> Result<(usize, f64)> {
        self.anti.check(self.anti.t0, t)?;
        let x = ((t - self.anti.t0) / self.anti.step).clamp(0.0, ANTIDERIVATIVE_NODES as f64);
        let k = (x.floor() as usize).min(ANTIDERIVATIVE_NODES - 1);
        Ok((k, self.anti.t0 + k as f64 * self.anti.step))
    }

    /// `d(t) = d0·exp(−2∫ρ) + c(t0, t)`.
    pub fn d_t(&self, t: f64) -> Result<f64> {
        let (k, a) = self.node_below(t)?;
        Ok(self.d_from(self.d_half[2 * k], a, t))
    }

    fn d_from(&self, d_a: f64, a: f64, t: f64) -> f64 {
        self.anti.decay_factor(a, t) * d_a + self.anti.c_st_panels(a, t, 2)
    }

    /// `c(t) = exp(−∫1/d)`.
    pub fn c_envelope(&self, t: f64) -> Result<f64> {
        let (k, a) = self.node_below(t)?;
        let da = self.d_half[2 * k];
        let mid = 0.5 * (a + t);
        let panel = (t - a) / 6.0 * (1.0 / da + 4.0 / self.d_from(da, a, mid) + 1.0 / self.d_from(da, a, t));
        Ok((-(self.inv_integral[k] + panel)).exp())
    }

    /// `c(t0, t)` from the start of the profile.
    pub fn c_st_from_start(&self, t: f64) -> Result<f64> {
        self.anti.c_st(self.anti.t0, t)
    }

    /// Table with columns `t, c_st_0t, d_t, c_envelope`.
    pub fn write_csv(&self, mut w: impl Write, times: &[f64]) -> Result<()> {
        writeln!(w, "t,c_st_0t,d_t,c_envelope")?;
        for &t in times {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(t),
                fmt_f64(self.c_st_from_start(t)?),
                fmt_f64(self.d_t(t)?),
                fmt_f64(self.c_envelope(t)?)
            )?;
        }
        Ok(())
    }
}

/// `(1 − e^{−2ρΔ})/(2ρ)`, equal to `Δ` at ρ = 0.
pub fn c_st_constant(rho: f64, elapsed: f64) -> f64 {
    let z = rho * elapsed;
    if rho.abs() < RHO_SERIES {
        elapsed * (1.0 - z + 2.0 / 3.0 * z * z)
    } else {
        -(-2.0 * z).exp_m1() / (2.0 * rho)
    }
}

/// `d0 e^{−2ρt} + (1 − e^{−2ρt})/(2ρ)`.
pub fn d_constant(d0: f64, rho: f64, t: f64) -> f64 {
    d0 * (-2.0 * rho * t).exp() + c_st_constant(rho, t)
}

/// `d0 e^{−2ρt}/d(t)`, which is `1/(1 + t/d0)` at ρ = 0.
pub fn c_envelope_constant(d0: f64, rho: f64, t: f64) -> f64 {
    d0 * (-2.0 * rho * t).exp() / d_constant(d0, rho, t)
}
