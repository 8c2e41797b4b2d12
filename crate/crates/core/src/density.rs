use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{Point, SpatialGrid, DEFAULT_CELL_CAP, MAX_DIM};

/// Nonnegative grid function with midpoint-rule integration.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Input(format!("density value {v} at cell {k} is not a nonnegative number")));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` at the cell centres.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(&grid.center(k))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Isotropic Gaussian `N(mean, variance·Id)` sampled at cell centres and
    /// rescaled to unit discrete mass.
    pub fn gaussian(grid: SpatialGrid, mean: &[f64], variance: f64) -> Result<Self> {
        Self::gaussian_mixture(grid, &[(1.0, mean.to_vec(), variance)])
    }

    /// Mixture `Σ wₖ N(mₖ, σₖ²·Id)`, normalised to unit discrete mass.
    pub fn gaussian_mixture(grid: SpatialGrid, parts: &[(f64, Vec<f64>, f64)]) -> Result<Self> {
        let d = grid.dim();
        for (w, m, var) in parts {
            if !(*var > 0.0) || !(*w >= 0.0) || m.len() != d {
                return Err(Error::Input(format!(
                    "invalid mixture component (weight {w}, mean {m:?}, variance {var})"
                )));
            }
        }
        let mut density = Self::from_fn(grid, |p| {
            parts
                .iter()
                .map(|(w, m, var)| {
                    let r2: f64 = (0..d).map(|a| (p[a] - m[a]).powi(2)).sum();
                    w * (-0.5 * r2 / var).exp() / (2.0 * std::f64::consts::PI * var).powf(0.5 * d as f64)
                })
                .sum()
        })?;
        density.normalize()?;
        Ok(density)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::Input(format!("cannot normalise a density of mass {m}")));
        }
        self.values.iter_mut().for_each(|v| *v /= m);
        Ok(())
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= 1e-6
    }

    /// `∫ f u dx` by the midpoint rule.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.values.iter().zip(f).map(|(u, f)| u * f).sum::<f64>() * self.grid.cell_volume()
    }

    /// First moments per axis.
    pub fn mean(&self) -> Point {
        let mut m = [0.0; MAX_DIM];
        let w = self.grid.cell_volume();
        for (k, u) in self.values.iter().enumerate() {
            let p = self.grid.center(k);
            for a in 0..self.grid.dim() {
                m[a] += u * p[a] * w;
            }
        }
        let mass = self.mass();
        m.iter_mut().for_each(|v| *v /= mass);
        m
    }

    /// Isotropic variance per axis, about the mean.
    pub fn variance(&self) -> Point {
        let mean = self.mean();
        let mut var = [0.0; MAX_DIM];
        let w = self.grid.cell_volume();
        for (k, u) in self.values.iter().enumerate() {
            let p = self.grid.center(k);
            for a in 0..self.grid.dim() {
                var[a] += u * (p[a] - mean[a]).powi(2) * w;
            }
        }
        let mass = self.mass();
        var.iter_mut().for_each(|v| *v /= mass);
        var
    }

    pub fn l1_distance(&self, other: &DensityGrid) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.cell_volume())
    }

    pub(crate) fn same_grid(&self, other: &DensityGrid) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Input("densities live on different grids".into()));
        }
        Ok(())
    }

    /// Sum blocks of `factor` cells per axis (mass preserving).
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let coarse = self.grid.coarsen(factor)?;
        let mut values = vec![0.0; coarse.len()];
        let scale = self.grid.cell_volume() / coarse.cell_volume();
        for (k, v) in self.values.iter().enumerate() {
            let [i, j] = self.grid.unflat(k);
            let (ci, cj) = if self.grid.dim() == 2 {
                (i / factor, j / factor)
            } else {
                (i / factor, 0)
            };
            values[coarse.flat(ci, cj)] += v * scale;
        }
        Self::new(coarse, values)
    }

    /// Flat binary dump: little-endian `u64` dimension, `u64` cell count per
    /// axis, `f64` lower and upper bound per axis, then the values row-major
    /// as `f64`.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let d = self.grid.dim();
        w.write_all(&(d as u64).to_le_bytes())?;
        for a in 0..d {
            w.write_all(&(self.grid.cells_along(a) as u64).to_le_bytes())?;
        }
        for a in 0..d {
            w.write_all(&self.grid.lower()[a].to_le_bytes())?;
            w.write_all(&self.grid.upper()[a].to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let d = u64::from_le_bytes(next(&mut r)?) as usize;
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::Input(format!("bad dimension {d} in density dump")));
        }
        let mut cells = [1usize; MAX_DIM];
        for c in cells.iter_mut().take(d) {
            *c = u64::from_le_bytes(next(&mut r)?) as usize;
        }
        let mut lower = [0.0; MAX_DIM];
        let mut upper = [1.0; MAX_DIM];
        for a in 0..d {
            lower[a] = f64::from_le_bytes(next(&mut r)?);
            upper[a] = f64::from_le_bytes(next(&mut r)?);
        }
        let grid = SpatialGrid::new(d, lower, upper, cells, DEFAULT_CELL_CAP)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            values.push(f64::from_le_bytes(next(&mut r)?));
        }
        Self::new(grid, values)
    }
}
