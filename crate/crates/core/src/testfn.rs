//! Random smooth test functions: an affine part plus up to three Gaussian
//! bumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Point, SpatialGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub weight: f64,
    pub center: Point,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: usize,
    pub offset: f64,
    pub slope: Point,
    pub bumps: Vec<Bump>,
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        Self::affine(c, [0.0, 0.0])
    }

    pub fn affine(offset: f64, slope: Point) -> Self {
        Self {
            id: 0,
            offset,
            slope,
            bumps: Vec::new(),
        }
    }

    pub fn with_bump(mut self, weight: f64, center: Point, width: f64) -> Self {
        self.bumps.push(Bump { weight, center, width });
        self
    }

    /// Draw member `id` of the family seeded by `seed`. Bumps sit in the
    /// central 60% of the box with widths of at least eight cells.
    pub fn random(grid: &SpatialGrid, seed: u64, id: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id as u64);
        let d = grid.dim();
        let (lo, hi) = (grid.lower(), grid.upper());
        let min_width = (0..d).map(|a| 8.0 * grid.spacing(a)).fold(0.0, f64::max).max(0.4);
        let scale = (0..d).map(|a| 0.5 * (hi[a] - lo[a])).fold(f64::INFINITY, f64::min);
        let mut slope = [0.0; 2];
        for s in slope.iter_mut().take(d) {
            *s = rng.random_range(-1.0..1.0);
        }
        let nbumps = rng.random_range(0..=3);
        let bumps = (0..nbumps)
            .map(|_| {
                let mut center = [0.0; 2];
                for a in 0..d {
                    let mid = 0.5 * (lo[a] + hi[a]);
                    center[a] = mid + 0.3 * (hi[a] - lo[a]) * rng.random_range(-1.0..1.0);
                }
                Bump {
                    weight: rng.random_range(-2.0..2.0),
                    center,
                    width: min_width.max(rng.random_range(0.05..0.2) * scale),
                }
            })
            .collect();
        Self {
            id,
            offset: rng.random_range(-1.0..1.0),
            slope,
            bumps,
        }
    }

    /// Random member shifted so that its minimum over the grid centres is a
    /// random level in `[0.3, 1.5]`.
    pub fn random_positive(grid: &SpatialGrid, seed: u64, id: usize) -> Self {
        let mut f = Self::random(grid, seed, id);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(id as u64);
        let level = rng.random_range(0.3..1.5);
        let min = f.on_grid(grid).into_iter().fold(f64::INFINITY, f64::min);
        f.offset += level - min;
        f
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let mut v = self.offset + self.slope[0] * x[0] + self.slope[1] * x[1];
        for b in &self.bumps {
            let r2 = (x[0] - b.center[0]).powi(2) + (x[1] - b.center[1]).powi(2);
            v += b.weight * (-0.5 * r2 / (b.width * b.width)).exp();
        }
        v
    }

    pub fn on_grid(&self, grid: &SpatialGrid) -> Vec<f64> {
        (0..grid.len()).map(|k| self.eval(&grid.center(k))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_reproducible_and_varied() {
        let g = SpatialGrid::new_1d(-10.0, 10.0, 256).unwrap();
        let a = TestFunction::random(&g, 7, 3);
        assert_eq!(a, TestFunction::random(&g, 7, 3));
        assert_ne!(a, TestFunction::random(&g, 7, 4));
    }

    #[test]
    fn positive_members_are_positive() {
        let g = SpatialGrid::new_2d([-8.0, -8.0], [8.0, 8.0], [64, 64]).unwrap();
        for id in 0..20 {
            let f = TestFunction::random_positive(&g, 1, id).on_grid(&g);
            let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!((0.3 - 1e-12..1.5).contains(&min));
        }
    }
}
