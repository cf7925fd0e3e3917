//! Uniform grids over `[-T, T)^d`, sampled complex functions on them, and the
//! elementary time-frequency operators (translation, modulation, their
//! composition) plus the discrete inner product.
//!
//! Positions are tracked in integer *steps* of the spacing `h = 1/m`, so every
//! translation by a commensurate amount is an exact relocation of samples.

use std::f64::consts::TAU;
use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::sum::pairwise_sum_complex;

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Integer position in units of the grid spacing, one slot per axis.
/// Slots at or beyond the grid dimension are kept at zero.
pub type Steps = [i64; MAX_DIM];

const COMMENSURATE_TOL: f64 = 1e-9;

/// JSON description of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub h: f64,
    pub half_extent: f64,
}

fn default_dim() -> usize {
    1
}

/// Uniform grid on `[-T, T)^d` with spacing `h = 1/m`.
///
/// The unit cube `[0,1)^d` holds exactly `m^d` samples and the origin is a
/// grid point, so unit cubes `k + [0,1)^d` align with sample blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    dim: usize,
    steps_per_unit: usize,
    half_steps: usize,
}

impl Grid {
    /// Builds a grid from a spacing and half-extent.
    ///
    /// `1/h` must be a positive integer. The half-extent is rounded to the
    /// nearest multiple of `h` so that `N h = 2T` holds exactly.
    pub fn new(dim: usize, h: f64, half_extent: f64) -> Result<Grid> {
        if dim == 0 || dim > MAX_DIM {
            return Err(GaborError::InvalidGrid(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if !(h > 0.0 && h <= 1.0 && h.is_finite()) {
            return Err(GaborError::InvalidGrid(format!("spacing {h} must lie in (0, 1]")));
        }
        let inv = 1.0 / h;
        let m = inv.round();
        if (inv - m).abs() > COMMENSURATE_TOL * m {
            return Err(GaborError::InvalidGrid(format!("1/h = {inv} is not an integer")));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(GaborError::InvalidGrid(format!("half extent {half_extent} must be positive")));
        }
        let half_steps = (half_extent * m).round();
        if half_steps < 1.0 {
            return Err(GaborError::InvalidGrid("half extent smaller than one cell".into()));
        }
        Grid::from_steps(dim, m as usize, half_steps as usize)
    }

    /// Grid with spacing `1/steps_per_unit` covering `half_steps` cells on each side of 0.
    pub fn from_steps(dim: usize, steps_per_unit: usize, half_steps: usize) -> Result<Grid> {
        if dim == 0 || dim > MAX_DIM {
            return Err(GaborError::InvalidGrid(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if steps_per_unit == 0 || half_steps == 0 {
            return Err(GaborError::InvalidGrid("empty grid".into()));
        }
        let n = (2 * half_steps) as u128;
        if n.pow(dim as u32) > (1u128 << 32) {
            return Err(GaborError::InvalidGrid("grid too large".into()));
        }
        Ok(Grid { dim, steps_per_unit, half_steps })
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Grid> {
        Grid::new(spec.dim, spec.h, spec.half_extent)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { dim: self.dim, h: self.spacing(), half_extent: self.half_extent() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }

    /// `m = 1/h`.
    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    pub fn half_steps(&self) -> i64 {
        self.half_steps as i64
    }

    pub fn half_extent(&self) -> f64 {
        self.half_steps as f64 / self.steps_per_unit as f64
    }

    pub fn samples_per_axis(&self) -> usize {
        2 * self.half_steps
    }

    /// Total number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.samples_per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of one grid cell, `h^d`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Converts a real offset to a whole number of steps, failing unless the
    /// offset is a multiple of `h`.
    pub fn steps_of(&self, value: f64) -> Result<i64> {
        steps_for(value, self.steps_per_unit)
    }

    /// Step range covered along each axis, inclusive.
    pub fn step_bounds(&self) -> (i64, i64) {
        (-self.half_steps(), self.half_steps() - 1)
    }

    pub fn contains_steps(&self, p: &Steps) -> bool {
        let (lo, hi) = self.step_bounds();
        p[..self.dim].iter().all(|&c| c >= lo && c <= hi)
    }

    /// Flat (row-major) index of a position, if it lies on the grid.
    #[inline]
    pub fn index_of(&self, p: &Steps) -> Option<usize> {
        let n = self.samples_per_axis() as i64;
        let half = self.half_steps();
        let mut idx = 0i64;
        for &c in &p[..self.dim] {
            let i = c + half;
            if i < 0 || i >= n {
                return None;
            }
            idx = idx * n + i;
        }
        Some(idx as usize)
    }

    /// Position of a flat index.
    #[inline]
    pub fn steps_at(&self, mut index: usize) -> Steps {
        let n = self.samples_per_axis();
        let mut p = [0i64; MAX_DIM];
        for axis in (0..self.dim).rev() {
            p[axis] = (index % n) as i64 - self.half_steps();
            index /= n;
        }
        p
    }

    /// Real coordinates of a position.
    pub fn coords(&self, p: &Steps) -> [f64; MAX_DIM] {
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = p[axis] as f64 * h;
        }
        x
    }

    /// Box of all positions on the grid.
    pub fn index_box(&self) -> IndexBox {
        let (lo, hi) = self.step_bounds();
        IndexBox::uniform(self.dim, lo, hi)
    }
}

pub(crate) fn steps_for(value: f64, steps_per_unit: usize) -> Result<i64> {
    let scaled = value * steps_per_unit as f64;
    let rounded = scaled.round();
    if !scaled.is_finite() || (scaled - rounded).abs() > COMMENSURATE_TOL * rounded.abs().max(1.0) {
        return Err(GaborError::Commensurability { value, spacing: 1.0 / steps_per_unit as f64 });
    }
    Ok(rounded as i64)
}

/// Inclusive box of integer multi-indices, iterated in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexBox {
    dim: usize,
    lo: Steps,
    hi: Steps,
}

impl IndexBox {
    pub fn new(dim: usize, lo: Steps, hi: Steps) -> IndexBox {
        IndexBox { dim, lo, hi }
    }

    /// The cube `[lo, hi]^d`.
    pub fn uniform(dim: usize, lo: i64, hi: i64) -> IndexBox {
        let mut l = [0; MAX_DIM];
        let mut h = [0; MAX_DIM];
        for axis in 0..dim {
            l[axis] = lo;
            h[axis] = hi;
        }
        IndexBox { dim, lo: l, hi: h }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> &Steps {
        &self.lo
    }

    pub fn hi(&self) -> &Steps {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1).max(0) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim).map(|a| self.extent(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: &Steps) -> bool {
        (0..self.dim).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }

    #[inline]
    pub fn flat(&self, p: &Steps) -> Option<usize> {
        let mut idx = 0usize;
        for (a, &c) in p.iter().enumerate().take(self.dim) {
            if c < self.lo[a] || c > self.hi[a] {
                return None;
            }
            idx = idx * self.extent(a) + (c - self.lo[a]) as usize;
        }
        Some(idx)
    }

    #[inline]
    pub fn at(&self, mut index: usize) -> Steps {
        let mut p = [0i64; MAX_DIM];
        for a in (0..self.dim).rev() {
            let e = self.extent(a);
            p[a] = self.lo[a] + (index % e) as i64;
            index /= e;
        }
        p
    }

    pub fn iter(&self) -> impl Iterator<Item = Steps> + '_ {
        (0..self.len()).map(move |i| self.at(i))
    }

    /// Intersection with another box of the same dimension.
    pub fn intersect(&self, other: &IndexBox) -> IndexBox {
        let mut lo = [0; MAX_DIM];
        let mut hi = [0; MAX_DIM];
        for a in 0..self.dim {
            lo[a] = self.lo[a].max(other.lo[a]);
            hi[a] = self.hi[a].min(other.hi[a]);
        }
        IndexBox { dim: self.dim, lo, hi }
    }

    /// The box shifted by `s`.
    pub fn shifted(&self, s: &Steps) -> IndexBox {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for a in 0..self.dim {
            lo[a] += s[a];
            hi[a] += s[a];
        }
        IndexBox { dim: self.dim, lo, hi }
    }
}

/// Complex samples of a function on a [`Grid`]; zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return Err(GaborError::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at every grid point; `f` receives real coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> GridFunction {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coords(&grid.steps_at(i));
                f(&x[..dim])
            })
            .collect();
        GridFunction { grid, values }
    }

    /// Samples a real-valued function.
    pub fn from_real_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> GridFunction {
        GridFunction::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at a step position; zero off the grid.
    #[inline]
    pub fn at_steps(&self, p: &Steps) -> Complex64 {
        match self.grid.index_of(p) {
            Some(i) => self.values[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Smallest box containing every nonzero sample, or `None` for the zero function.
    pub fn support_box(&self) -> Option<IndexBox> {
        let dim = self.grid.dim();
        let mut lo = [i64::MAX; MAX_DIM];
        let mut hi = [i64::MIN; MAX_DIM];
        let mut any = false;
        for (i, v) in self.values.iter().enumerate() {
            if *v != Complex64::new(0.0, 0.0) {
                any = true;
                let p = self.grid.steps_at(i);
                for a in 0..dim {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
        }
        if !any {
            return None;
        }
        for a in dim..MAX_DIM {
            lo[a] = 0;
            hi[a] = 0;
        }
        Some(IndexBox::new(dim, lo, hi))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn scaled(&self, c: Complex64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Discrete L² norm `(h^d Σ |f|²)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        inner_product(self, self).map(|z| z.re.sqrt()).unwrap_or(0.0)
    }

    /// Largest sample modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub(crate) fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(GaborError::IncompatibleGrids);
        }
        Ok(())
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;

    /// Panics on grid mismatch; use [`GridFunction::check_grid`]-guarded APIs for fallible code.
    fn add(self, rhs: &GridFunction) -> GridFunction {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect();
        GridFunction { grid: self.grid, values }
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;

    fn sub(self, rhs: &GridFunction) -> GridFunction {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        GridFunction { grid: self.grid, values }
    }
}

/// Converts a real shift vector into steps.
pub fn shift_steps(grid: &Grid, t: &[f64]) -> Result<Steps> {
    if t.len() != grid.dim() {
        return Err(GaborError::InvalidParameter(format!(
            "shift has {} components, grid dimension is {}",
            t.len(),
            grid.dim()
        )));
    }
    let mut s = [0i64; MAX_DIM];
    for (a, &v) in t.iter().enumerate() {
        s[a] = grid.steps_of(v)?;
    }
    Ok(s)
}

/// `T_t f(x) = f(x - t)` by an exact whole-step relocation.
pub fn translate(f: &GridFunction, t: &[f64]) -> Result<GridFunction> {
    let s = shift_steps(f.grid(), t)?;
    Ok(translate_steps(f, &s))
}

/// Translation by a step vector; samples leaving the grid are dropped.
pub fn translate_steps(f: &GridFunction, s: &Steps) -> GridFunction {
    let grid = *f.grid();
    let dim = grid.dim();
    let values = (0..grid.len())
        .map(|i| {
            let mut p = grid.steps_at(i);
            for a in 0..dim {
                p[a] -= s[a];
            }
            f.at_steps(&p)
        })
        .collect();
    GridFunction { grid, values }
}

/// `e^{2πi t}` with the argument reduced to one period first.
#[inline]
pub fn unit_phase(turns: f64) -> Complex64 {
    let r = turns - turns.round();
    Complex64::from_polar(1.0, TAU * r)
}

/// `M_ω f(x) = e^{2πi⟨ω,x⟩} f(x)`.
pub fn modulate(f: &GridFunction, omega: &[f64]) -> Result<GridFunction> {
    let grid = *f.grid();
    if omega.len() != grid.dim() {
        return Err(GaborError::InvalidParameter(format!(
            "frequency has {} components, grid dimension is {}",
            omega.len(),
            grid.dim()
        )));
    }
    let m = grid.steps_per_unit() as f64;
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = grid.steps_at(i);
            // ⟨ω, x⟩ with x = p/m; each product reduced mod 1 before summing
            let turns: f64 = omega.iter().zip(&p).map(|(w, &c)| frac(w * c as f64 / m)).sum();
            v * unit_phase(turns)
        })
        .collect();
    Ok(GridFunction { grid, values })
}

#[inline]
fn frac(x: f64) -> f64 {
    x - x.round()
}

/// Time-frequency shift `(τ(t,ω)g)(x) = g(x - t) e^{2πi⟨x,ω⟩}`, i.e. `M_ω T_t g`.
pub fn tf_shift(g: &GridFunction, t: &[f64], omega: &[f64]) -> Result<GridFunction> {
    modulate(&translate(g, t)?, omega)
}

/// Discrete inner product `h^d Σ f(x) conj(g(x))`.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.check_grid(g)?;
    let terms: Vec<Complex64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).collect();
    Ok(pairwise_sum_complex(&terms) * f.grid.cell_measure())
}
