//! Gabor systems, the short-time Fourier transform, coefficient lattices and
//! the frame operator evaluated straight from its lattice-sum definition.
//!
//! On a grid of spacing `h` with `1/b = K h`, the modulations `M_{mb}` are
//! `K`-periodic in `m`, so one period of frequency indices is an exact
//! (not truncated) frequency sum. [`apply_frame_direct`] is the brute-force
//! reference the Walnut and Janssen paths are validated against.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GaborError, Result};
use crate::grid::{inner_product, steps_for, tf_shift, Grid, GridFunction, IndexBox, Steps, MAX_DIM};
use crate::sum::pairwise_sum_complex;

/// Smallest admissible `|⟨γ, g⟩|`.
pub const DEGENERATE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Analysis window `g`, synthesis window `γ` and lattice `aℤ^d × bℤ^d`.
#[derive(Debug, Clone)]
pub struct GaborSystem {
    g: GridFunction,
    gamma: GridFunction,
    a: f64,
    b: f64,
    a_steps: i64,
    shift_steps: i64,
    normalization: Complex64,
    g_support: IndexBox,
    gamma_support: IndexBox,
    time_range: IndexBox,
}

impl GaborSystem {
    /// System normalized by `⟨γ, g⟩`.
    pub fn new(g: GridFunction, gamma: GridFunction, a: f64, b: f64) -> Result<GaborSystem> {
        let normalization = inner_product(&gamma, &g)?;
        GaborSystem::with_normalization(g, gamma, a, b, normalization)
    }

    /// `g = γ`, normalized by `‖g‖_2²`. Coincides with [`GaborSystem::new`]`(g, g, ..)`.
    pub fn self_dual(g: GridFunction, a: f64, b: f64) -> Result<GaborSystem> {
        let energy = g.norm_l2().powi(2);
        GaborSystem::with_normalization(g.clone(), g, a, b, Complex64::new(energy, 0.0))
    }

    fn with_normalization(
        g: GridFunction,
        gamma: GridFunction,
        a: f64,
        b: f64,
        normalization: Complex64,
    ) -> Result<GaborSystem> {
        g.check_grid(&gamma)?;
        let grid = *g.grid();
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(GaborError::InvalidParameter(format!("lattice parameters a={a}, b={b} must be positive")));
        }
        let m = grid.steps_per_unit();
        let a_steps = steps_for(a, m)?;
        let shift_steps = steps_for(1.0 / b, m)?;
        if a_steps < 1 || shift_steps < 1 {
            return Err(GaborError::InvalidParameter("a and 1/b must be at least one grid step".into()));
        }
        if normalization.norm() <= DEGENERATE_TOL {
            return Err(GaborError::DegeneratePair(normalization.norm()));
        }
        let g_support = g.support_box().ok_or(GaborError::DegeneratePair(0.0))?;
        let gamma_support = gamma.support_box().ok_or(GaborError::DegeneratePair(0.0))?;
        let time_range = time_range(&grid, a_steps, &g_support, &gamma_support);
        Ok(GaborSystem { g, gamma, a, b, a_steps, shift_steps, normalization, g_support, gamma_support, time_range })
    }

    pub fn g(&self) -> &GridFunction {
        &self.g
    }

    pub fn gamma(&self) -> &GridFunction {
        &self.gamma
    }

    pub fn grid(&self) -> &Grid {
        self.g.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a / h`.
    pub fn a_steps(&self) -> i64 {
        self.a_steps
    }

    /// `(1/b) / h`; also the period of the modulation index on the grid.
    pub fn shift_steps(&self) -> i64 {
        self.shift_steps
    }

    /// `⟨γ, g⟩` (or `‖g‖²` for [`GaborSystem::self_dual`]).
    pub fn normalization(&self) -> Complex64 {
        self.normalization
    }

    pub fn g_support(&self) -> &IndexBox {
        &self.g_support
    }

    pub fn gamma_support(&self) -> &IndexBox {
        &self.gamma_support
    }

    /// Time indices `n` for which both `T_{na} g` and `T_{na} γ` meet the grid.
    pub fn time_range(&self) -> &IndexBox {
        &self.time_range
    }

    /// One full period of modulation indices, centered at zero.
    pub fn frequency_range(&self) -> IndexBox {
        let k = self.shift_steps;
        let lo = -(k / 2);
        IndexBox::uniform(self.dim(), lo, lo + k - 1)
    }

    pub fn is_self_dual(&self) -> bool {
        self.g == self.gamma
    }
}

fn time_range(grid: &Grid, a_steps: i64, g: &IndexBox, gamma: &IndexBox) -> IndexBox {
    let (glo, ghi) = grid.step_bounds();
    let mut lo = [0; MAX_DIM];
    let mut hi = [0; MAX_DIM];
    for axis in 0..grid.dim() {
        let lower = (glo - g.hi()[axis]).max(glo - gamma.hi()[axis]);
        let upper = (ghi - g.lo()[axis]).min(ghi - gamma.lo()[axis]);
        lo[axis] = div_ceil(lower, a_steps);
        hi[axis] = upper.div_euclid(a_steps);
    }
    IndexBox::new(grid.dim(), lo, hi)
}

pub(crate) fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// `e^{2πi r/K}` for `r = 0..K`.
pub(crate) fn roots_of_unity(k: i64) -> Vec<Complex64> {
    (0..k).map(|r| Complex64::from_polar(1.0, TAU * r as f64 / k as f64)).collect()
}

#[inline]
pub(crate) fn phase_index(m: &Steps, p: &Steps, dim: usize, k: i64) -> usize {
    let mut acc = 0i64;
    for a in 0..dim {
        acc = (acc + (m[a] % k) * (p[a] % k)) % k;
    }
    acc.rem_euclid(k) as usize
}

/// `(F_g f)(t, ω) = ⟨f, τ(t, ω) g⟩`.
pub fn stft(f: &GridFunction, g: &GridFunction, t: &[f64], omega: &[f64]) -> Result<Complex64> {
    f.check_grid(g)?;
    inner_product(f, &tf_shift(g, t, omega)?)
}

/// Gabor coefficients `⟨f, τ(na, mb) g⟩` over the system's time range and
/// one full period of frequency indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientLattice {
    time: IndexBox,
    freq: IndexBox,
    a: f64,
    b: f64,
    entries: Vec<Complex64>,
}

impl CoefficientLattice {
    pub fn time_range(&self) -> &IndexBox {
        &self.time
    }

    pub fn frequency_range(&self) -> &IndexBox {
        &self.freq
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, n: &Steps, m: &Steps) -> Option<Complex64> {
        let i = self.time.flat(n)?;
        let j = self.freq.flat(m)?;
        Some(self.entries[i * self.freq.len() + j])
    }

    /// `Σ |c_{n,m}|²`.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.entries.iter().map(|c| c.norm_sqr()).collect();
        crate::sum::pairwise_sum(&sq)
    }

    /// Iterates `(n, m, c)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Steps, Steps, Complex64)> + '_ {
        let fl = self.freq.len();
        self.entries.iter().enumerate().map(move |(i, c)| (self.time.at(i / fl), self.freq.at(i % fl), *c))
    }
}

/// All coefficients `⟨f, τ(na, mb) g⟩`; rows (fixed `n`) are computed in parallel.
pub fn gabor_coefficients(f: &GridFunction, sys: &GaborSystem) -> Result<CoefficientLattice> {
    f.check_grid(sys.g())?;
    let grid = *sys.grid();
    let dim = grid.dim();
    let k = sys.shift_steps();
    let roots = roots_of_unity(k);
    let freq = sys.frequency_range();
    let time = *sys.time_range();
    let cell = grid.cell_measure();

    let rows: Vec<Vec<Complex64>> = (0..time.len())
        .into_par_iter()
        .map(|ti| {
            let n = time.at(ti);
            let shift = scaled_steps(&n, sys.a_steps(), dim);
            let window = sys.g_support().shifted(&shift).intersect(&grid.index_box());
            // f(y) conj(g(y - na)) over the shifted support
            let products: Vec<(Steps, Complex64)> = window
                .iter()
                .filter_map(|y| {
                    let mut src = y;
                    for a in 0..dim {
                        src[a] -= shift[a];
                    }
                    let v = f.at_steps(&y) * sys.g().at_steps(&src).conj();
                    (v != ZERO).then_some((y, v))
                })
                .collect();
            let mut buf = Vec::with_capacity(products.len());
            freq.iter()
                .map(|m| {
                    buf.clear();
                    buf.extend(products.iter().map(|(y, v)| v * roots[phase_index(&m, y, dim, k)].conj()));
                    pairwise_sum_complex(&buf) * cell
                })
                .collect()
        })
        .collect();

    Ok(CoefficientLattice { time, freq, a: sys.a(), b: sys.b(), entries: rows.into_iter().flatten().collect() })
}

fn scaled_steps(n: &Steps, scale: i64, dim: usize) -> Steps {
    let mut s = [0; MAX_DIM];
    for a in 0..dim {
        s[a] = n[a] * scale;
    }
    s
}

/// `S f = (ab)^d / ⟨γ,g⟩ Σ_{n,m} ⟨f, τ(na,mb)g⟩ τ(na,mb)γ`, summed term by term.
///
/// Cost is `O(#n · K^d · |supp|)`. Each output sample accumulates its terms in
/// a fixed order, so results do not depend on the thread count.
pub fn apply_frame_direct(f: &GridFunction, sys: &GaborSystem) -> Result<GridFunction> {
    let coeffs = gabor_coefficients(f, sys)?;
    synthesize(&coeffs, sys)
}

/// `(ab)^d / ⟨γ,g⟩ Σ c_{n,m} τ(na,mb)γ`.
pub fn synthesize(coeffs: &CoefficientLattice, sys: &GaborSystem) -> Result<GridFunction> {
    let grid = *sys.grid();
    let dim = grid.dim();
    let k = sys.shift_steps();
    let roots = roots_of_unity(k);
    let freq = coeffs.freq;
    let time = coeffs.time;
    let a_steps = sys.a_steps();
    let gsup = sys.gamma_support();
    let scale = (sys.a() * sys.b()).powi(dim as i32) / sys.normalization();

    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.steps_at(i);
            // n with x - n a inside supp γ
            let mut lo = [0; MAX_DIM];
            let mut hi = [0; MAX_DIM];
            for a in 0..dim {
                lo[a] = div_ceil(x[a] - gsup.hi()[a], a_steps).max(time.lo()[a]);
                hi[a] = (x[a] - gsup.lo()[a]).div_euclid(a_steps).min(time.hi()[a]);
            }
            let active = IndexBox::new(dim, lo, hi);
            let mut acc = ZERO;
            for n in active.iter() {
                let mut src = x;
                for a in 0..dim {
                    src[a] -= n[a] * a_steps;
                }
                let w = sys.gamma().at_steps(&src);
                if w == ZERO {
                    continue;
                }
                let row = time.flat(&n).expect("active range inside time range") * freq.len();
                let mut inner = ZERO;
                for (j, m) in freq.iter().enumerate() {
                    inner += coeffs.entries[row + j] * roots[phase_index(&m, &x, dim, k)];
                }
                acc += w * inner;
            }
            acc * scale
        })
        .collect();
    GridFunction::from_values(grid, values)
}

/// Resolution of the `(t, ω)` Riemann sum used by [`reconstruct_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfResolution {
    /// Time step; must be a multiple of the grid spacing.
    pub t_step: f64,
    /// Frequency step. Frequencies cover one aliasing period `[-1/(2h), 1/(2h))`.
    pub omega_step: f64,
    /// Terms with `|F_g f(t,ω)| <= floor · max |F_g f|` are dropped.
    pub floor: f64,
}

/// Riemann-sum approximation of the STFT inversion integral
/// `f = 1/⟨γ,g⟩ ∬ (F_g f)(t,ω) τ(t,ω)γ dt dω`.
pub fn reconstruct_integral(
    f: &GridFunction,
    g: &GridFunction,
    gamma: &GridFunction,
    res: TfResolution,
) -> Result<GridFunction> {
    f.check_grid(g)?;
    f.check_grid(gamma)?;
    let grid = *f.grid();
    let dim = grid.dim();
    let norm = inner_product(gamma, g)?;
    if norm.norm() <= DEGENERATE_TOL {
        return Err(GaborError::DegeneratePair(norm.norm()));
    }
    if !(res.omega_step > 0.0 && res.omega_step.is_finite() && res.floor >= 0.0) {
        return Err(GaborError::InvalidParameter(format!("invalid resolution {res:?}")));
    }
    let t_steps = steps_for(res.t_step, grid.steps_per_unit())?;
    if t_steps < 1 {
        return Err(GaborError::InvalidParameter("t_step must be positive".into()));
    }
    let (Some(gsup), Some(gamsup)) = (g.support_box(), gamma.support_box()) else {
        return Err(GaborError::DegeneratePair(0.0));
    };
    let times = time_range(&grid, t_steps, &gsup, &gamsup);
    let nyquist = 0.5 / grid.spacing();
    let m_lo = div_ceil_f(-nyquist, res.omega_step);
    let m_hi = {
        let top = (nyquist / res.omega_step).ceil() as i64 - 1;
        if (top + 1) as f64 * res.omega_step < nyquist { top + 1 } else { top }
    };
    let freqs = IndexBox::uniform(dim, m_lo, m_hi);

    let mut terms: Vec<(Steps, Vec<f64>, Complex64)> = Vec::new();
    for n in times.iter() {
        for m in freqs.iter() {
            let omega: Vec<f64> = (0..dim).map(|a| m[a] as f64 * res.omega_step).collect();
            terms.push((n, omega, ZERO));
        }
    }
    terms.par_iter_mut().try_for_each(|(n, omega, c)| -> Result<()> {
        let t: Vec<f64> = (0..dim).map(|a| (n[a] * t_steps) as f64 * grid.spacing()).collect();
        *c = stft(f, g, &t, omega)?;
        Ok(())
    })?;
    let peak = terms.iter().map(|(_, _, c)| c.norm()).fold(0.0, f64::max);
    let keep: Vec<&(Steps, Vec<f64>, Complex64)> =
        terms.iter().filter(|(_, _, c)| c.norm() > res.floor * peak && *c != ZERO).collect();

    let weight = (res.t_step * res.omega_step).powi(dim as i32) / norm;
    let mut out = GridFunction::zeros(grid);
    for (n, omega, c) in keep {
        let t: Vec<f64> = (0..dim).map(|a| (n[a] * t_steps) as f64 * grid.spacing()).collect();
        let atom = tf_shift(gamma, &t, omega)?;
        out = &out + &atom.scaled(c * weight);
    }
    Ok(out)
}

fn div_ceil_f(x: f64, step: f64) -> i64 {
    (x / step).ceil() as i64
}

/// Result of [`estimate_frame_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBoundEstimate {
    /// Rayleigh-quotient estimate of `‖S_{a,b}‖` on `L²`.
    pub upper: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FrameBoundEstimate {
    /// Bessel constant `B` with `Σ |⟨f, τ(na,mb)g⟩|² ≤ B ‖f‖²`.
    pub fn bessel_bound(&self, sys: &GaborSystem) -> f64 {
        self.upper * sys.normalization().re / (sys.a() * sys.b()).powi(sys.dim() as i32)
    }
}

pub const DEFAULT_POWER_ITERATIONS: usize = 200;
const RAYLEIGH_TOL: f64 = 1e-10;

/// Power iteration on `S_{a,b;g,g}` from a seeded random start.
pub fn estimate_frame_bounds(sys: &GaborSystem, iterations: usize, seed: u64) -> Result<FrameBoundEstimate> {
    if !sys.is_self_dual() {
        return Err(GaborError::InvalidParameter("frame bound estimation needs g = gamma".into()));
    }
    let sys = GaborSystem::self_dual(sys.g().clone(), sys.a(), sys.b())?;
    let grid = *sys.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<Complex64> =
        (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut v = GridFunction::from_values(grid, start)?;
    v = v.scaled(Complex64::new(1.0 / v.norm_l2(), 0.0));

    let mut lambda = 0.0;
    for it in 1..=iterations.max(1) {
        let w = apply_frame_direct(&v, &sys)?;
        let next = inner_product(&w, &v)?.re;
        let norm = w.norm_l2();
        if norm == 0.0 {
            return Ok(FrameBoundEstimate { upper: 0.0, converged: true, iterations: it });
        }
        v = w.scaled(Complex64::new(1.0 / norm, 0.0));
        if it > 1 && (next - lambda).abs() < RAYLEIGH_TOL * next.abs() {
            return Ok(FrameBoundEstimate { upper: next, converged: true, iterations: it });
        }
        lambda = next;
    }
    Ok(FrameBoundEstimate { upper: lambda, converged: false, iterations })
}
