//! Initial-data and reference profiles shared by solvers, tests, and the CLI.

use crate::error::Result;
use crate::grid::{Field, UniformGrid};

/// amplitude * exp(-|x|^2 / width^2)
pub fn gaussian(grid: UniformGrid, amplitude: f64, width: f64) -> Result<Field> {
    Field::from_fn(grid, move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        amplitude * (-r2 / (width * width)).exp()
    })
}

/// Indicator of the interval [a, b] (1D).
pub fn indicator(grid: UniformGrid, a: f64, b: f64) -> Result<Field> {
    Field::from_fn(grid, move |x| if x[0] >= a && x[0] <= b { 1.0 } else { 0.0 })
}

/// Spatial profile of the explicit half-Laplacian logarithmic solution at
/// time t: U(x,t) = 2 (T - t) / (1 + x^2).
pub fn log_half_profile(grid: UniformGrid, t_extinct: f64, t: f64) -> Result<Field> {
    Field::from_fn(grid, move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        2.0 * (t_extinct - t) / (1.0 + r2)
    })
}

/// |x|^p sampled away from the origin (cell-centered grids have no node at 0).
pub fn power_profile(grid: UniformGrid, p: f64) -> Result<Field> {
    Field::from_fn(grid, move |x| {
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        r.powf(p)
    })
}
