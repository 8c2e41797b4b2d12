//! Finite-difference derivatives of cell-centred grid functions.
//!
//! Interior cells use fourth-order central stencils; the second and
//! second-to-last cells fall back to second-order central stencils and the
//! boundary cells use second-order one-sided stencils. Every stencil is exact
//! on quadratics.

use crate::model::SpatialGrid;

fn for_each_line(grid: &SpatialGrid, axis: usize, mut f: impl FnMut(usize, usize, usize)) {
    let n = grid.cells();
    let stride = grid.stride(axis);
    if axis == 0 {
        for j in 0..n[1] {
            f(grid.flat(0, j), stride, n[0]);
        }
    } else {
        for i in 0..n[0] {
            f(grid.flat(i, 0), stride, n[1]);
        }
    }
}

/// `∂f/∂x_axis` at every cell.
pub fn derivative(f: &[f64], grid: &SpatialGrid, axis: usize) -> Vec<f64> {
    debug_assert_eq!(f.len(), grid.len());
    let h = grid.spacing(axis);
    let mut out = vec![0.0; f.len()];
    for_each_line(grid, axis, |start, s, n| {
        let at = |i: usize| f[start + i * s];
        for i in 0..n {
            let d = if i == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
            } else if i == 1 || i == n - 2 {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            } else {
                (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h)
            };
            out[start + i * s] = d;
        }
    });
    out
}

/// `∂²f/∂x_axis²` at every cell.
pub fn second_derivative(f: &[f64], grid: &SpatialGrid, axis: usize) -> Vec<f64> {
    debug_assert_eq!(f.len(), grid.len());
    let h2 = grid.spacing(axis).powi(2);
    let mut out = vec![0.0; f.len()];
    for_each_line(grid, axis, |start, s, n| {
        let at = |i: usize| f[start + i * s];
        for i in 0..n {
            let d = if i == 0 {
                (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2
            } else if i == n - 1 {
                (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) / h2
            } else if i == 1 || i == n - 2 {
                (at(i - 1) - 2.0 * at(i) + at(i + 1)) / h2
            } else {
                (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2))
                    / (12.0 * h2)
            };
            out[start + i * s] = d;
        }
    });
    out
}

/// Gradient components, one grid function per axis.
pub fn gradient(f: &[f64], grid: &SpatialGrid) -> Vec<Vec<f64>> {
    (0..grid.dim()).map(|a| derivative(f, grid, a)).collect()
}

/// Hessian entries `[i][j]` as grid functions (symmetric; mixed terms are
/// derivatives of derivatives).
pub fn hessian(f: &[f64], grid: &SpatialGrid) -> Vec<Vec<Vec<f64>>> {
    let d = grid.dim();
    let mut hess = vec![vec![Vec::new(); d]; d];
    for a in 0..d {
        hess[a][a] = second_derivative(f, grid, a);
    }
    if d == 2 {
        let fy = derivative(f, grid, 1);
        let fxy = derivative(&fy, grid, 0);
        hess[0][1] = fxy.clone();
        hess[1][0] = fxy;
    }
    hess
}
