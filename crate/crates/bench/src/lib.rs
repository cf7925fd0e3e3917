//! Fixtures shared by the operator benchmarks.

use gabor_amalgam::signal::random_signal;
use gabor_amalgam::{sample_window, GaborSystem, Grid, GridFunction, WindowSpec};

/// Gaussian analysis window with a cubic B-spline dual on `[-T, T)`, `h = 1/m`,
/// `a = 1/2`, `b = 1/4`, plus a random test signal on `[-2, 2)`.
pub fn fixture(steps_per_unit: usize, half_extent: f64) -> (GaborSystem, GridFunction) {
    let grid = Grid::new(1, 1.0 / steps_per_unit as f64, half_extent).unwrap();
    let g = sample_window(&WindowSpec::Gaussian { sigma: 1.0, radius: 4.0 }, &grid).unwrap();
    let gamma = sample_window(&WindowSpec::Bspline { order: 3 }, &grid).unwrap();
    let sys = GaborSystem::new(g, gamma, 0.5, 0.25).unwrap();
    let f = random_signal(&grid, -2.0, 2.0, 1);
    (sys, f)
}
