//! Test functions `f` for operator experiments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::grid::{translate, Grid, GridFunction};
use crate::window::{sample_window, WindowSpec};

/// A test function family. Multi-dimensional members are tensor products
/// of the one-dimensional profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    /// Piecewise-linear hat on `[left, right]` peaking at the midpoint.
    Hat { left: f64, right: f64 },
    /// `exp(-π|x - c|²/σ²)`, zero where `max_j |x_j - c| > radius`.
    Gaussian { center: f64, sigma: f64, radius: f64 },
    /// `χ_{[left, right)}`, or `χ_{[left, right]}` when `closed`.
    Indicator {
        left: f64,
        right: f64,
        #[serde(default)]
        closed: bool,
    },
    /// A library window translated by `shift` along every axis.
    Window { window: WindowSpec, shift: f64 },
    /// I.i.d. uniform complex samples with real and imaginary parts in `[-1, 1)` on `[left, right)`.
    Random { left: f64, right: f64, seed: u64 },
}

impl SignalSpec {
    /// Per-axis interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SignalSpec::Hat { left, right } | SignalSpec::Indicator { left, right, .. } => (left, right),
            SignalSpec::Random { left, right, .. } => (left, right),
            SignalSpec::Gaussian { center, radius, .. } => (center - radius, center + radius),
            SignalSpec::Window { window, shift } => {
                let (lo, hi) = window.support();
                (lo + shift, hi + shift)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        let ok = lo.is_finite()
            && hi.is_finite()
            && lo < hi
            && match *self {
                SignalSpec::Gaussian { sigma, radius, .. } => sigma > 0.0 && radius > 0.0,
                _ => true,
            };
        if ok {
            Ok(())
        } else {
            Err(GaborError::InvalidParameter(format!("invalid test function: {self:?}")))
        }
    }
}

/// Samples a test function on a grid.
pub fn sample_signal(spec: &SignalSpec, grid: &Grid) -> Result<GridFunction> {
    spec.validate()?;
    let f = match spec {
        SignalSpec::Hat { left, right } => {
            let (mid, half) = (0.5 * (left + right), 0.5 * (right - left));
            GridFunction::from_real_fn(*grid, |x| x.iter().map(|c| (1.0 - (c - mid).abs() / half).max(0.0)).product())
        }
        SignalSpec::Gaussian { center, sigma, radius } => GridFunction::from_real_fn(*grid, |x| {
            if x.iter().any(|c| (c - center).abs() > *radius) {
                0.0
            } else {
                x.iter().map(|c| (-std::f64::consts::PI * ((c - center) / sigma).powi(2)).exp()).product()
            }
        }),
        SignalSpec::Indicator { left, right, closed } => GridFunction::from_real_fn(*grid, |x| {
            let inside = x.iter().all(|&c| c >= *left && (c < *right || (*closed && c == *right)));
            if inside {
                1.0
            } else {
                0.0
            }
        }),
        SignalSpec::Window { window, shift } => {
            let w = sample_window(window, grid)?;
            translate(&w, &vec![*shift; grid.dim()])?
        }
        SignalSpec::Random { left, right, seed } => random_signal(grid, *left, *right, *seed),
    };
    Ok(f)
}

/// Random complex samples on `[left, right)^d`, reproducible from `seed`.
pub fn random_signal(grid: &Grid, left: f64, right: f64, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let x = grid.coords(&grid.steps_at(i));
            let inside = x[..grid.dim()].iter().all(|&c| c >= left && c < right);
            // draw for every sample so the stream does not depend on the support
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if inside {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    GridFunction::from_values(*grid, values).expect("length matches grid")
}
