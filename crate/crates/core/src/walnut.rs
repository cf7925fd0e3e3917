//! Correlation functions `G_{a,b;n}`, the Walnut representation of the frame
//! operator, its `T + R` split and the explicit norm constants.
//!
//! `G_{a,b;n}(x) = Σ_k conj(g)(x - n/b - ak) γ(x - ak)` is `a`-periodic, so it
//! is stored on the fundamental cell `[0,a)^d` and extended on demand.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amalgam::{wiener_norm, ExponentPair};
use crate::error::{GaborError, Result};
use crate::gabor::{div_ceil, roots_of_unity, phase_index, GaborSystem, DEGENERATE_TOL};
use crate::grid::{GridFunction, IndexBox, Steps, MAX_DIM};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Samples of an `a`-periodic function on the cell `[0,a)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFunction {
    cell: IndexBox,
    period_steps: i64,
    values: Vec<Complex64>,
}

impl CellFunction {
    pub(crate) fn from_samples(dim: usize, period_steps: i64, values: Vec<Complex64>) -> CellFunction {
        CellFunction { cell: IndexBox::uniform(dim, 0, period_steps - 1), period_steps, values }
    }

    pub fn cell(&self) -> &IndexBox {
        &self.cell
    }

    /// Period in grid steps (`a/h`).
    pub fn period_steps(&self) -> i64 {
        self.period_steps
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at any grid position via periodic extension.
    #[inline]
    pub fn at(&self, p: &Steps) -> Complex64 {
        let mut q = [0; MAX_DIM];
        for a in 0..self.cell.dim() {
            q[a] = p[a].rem_euclid(self.period_steps);
        }
        self.values[self.cell.flat(&q).expect("reduced into cell")]
    }

    /// Discrete essential sup over the cell.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Position (in the cell) where `|value|` is largest.
    pub fn argmax(&self) -> Steps {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, v)| if v.norm() > bv { (i, v.norm()) } else { (bi, bv) });
        self.cell.at(i)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> CellFunction {
        CellFunction { cell: self.cell, period_steps: self.period_steps, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `l`-th Fourier coefficient by cell quadrature,
    /// `a^{-d} ∫_{[0,a)^d} G(x) e^{-2πi⟨l, x/a⟩} dx`.
    pub fn fourier_coefficient(&self, l: &Steps) -> Complex64 {
        let dim = self.cell.dim();
        let roots = roots_of_unity(self.period_steps);
        let sum: Complex64 = self
            .cell
            .iter()
            .zip(&self.values)
            .map(|(c, v)| v * roots[phase_index(l, &c, dim, self.period_steps)].conj())
            .sum();
        sum / (self.values.len() as f64)
    }

    /// Discrete `L²` distance over the cell (cell measure `h^d`).
    pub fn l2_distance(&self, other: &CellFunction, spacing: f64) -> f64 {
        let dim = self.cell.dim();
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        (s * spacing.powi(dim as i32)).sqrt()
    }
}

/// Range of `n` with `n/b ∈ supp γ - supp g`, outside of which `G_{a,b;n} ≡ 0`.
pub fn correlation_range(sys: &GaborSystem) -> IndexBox {
    let dim = sys.dim();
    let k = sys.shift_steps();
    let (g, gam) = (sys.g_support(), sys.gamma_support());
    let mut lo = [0; MAX_DIM];
    let mut hi = [0; MAX_DIM];
    for a in 0..dim {
        lo[a] = div_ceil(gam.lo()[a] - g.hi()[a], k);
        hi[a] = (gam.hi()[a] - g.lo()[a]).div_euclid(k);
    }
    IndexBox::new(dim, lo, hi)
}

/// `G_{a,b;n}` evaluated from its defining sum at any grid position `x`.
pub fn correlation_at(sys: &GaborSystem, n: &Steps, x: &Steps) -> Complex64 {
    let dim = sys.dim();
    let a_steps = sys.a_steps();
    let k = sys.shift_steps();
    let gsup = sys.gamma_support();
    let mut lo = [0; MAX_DIM];
    let mut hi = [0; MAX_DIM];
    for a in 0..dim {
        lo[a] = div_ceil(x[a] - gsup.hi()[a], a_steps);
        hi[a] = (x[a] - gsup.lo()[a]).div_euclid(a_steps);
    }
    let mut acc = ZERO;
    for j in IndexBox::new(dim, lo, hi).iter() {
        let mut y = *x;
        let mut z = *x;
        for a in 0..dim {
            y[a] -= j[a] * a_steps;
            z[a] = y[a] - n[a] * k;
        }
        acc += sys.g().at_steps(&z).conj() * sys.gamma().at_steps(&y);
    }
    acc
}

/// Samples of `G_{a,b;n}` on the fundamental cell.
pub fn correlation_fn(sys: &GaborSystem, n: &Steps) -> CellFunction {
    let dim = sys.dim();
    let cell = IndexBox::uniform(dim, 0, sys.a_steps() - 1);
    let values = cell.iter().map(|c| correlation_at(sys, n, &c)).collect();
    CellFunction::from_samples(dim, sys.a_steps(), values)
}

/// All nonvanishing-range members `G_{a,b;n}` of a system, sorted by `n`.
#[derive(Debug, Clone)]
pub struct CorrelationFamily {
    range: IndexBox,
    members: Vec<CellFunction>,
    a: f64,
    shift_steps: i64,
    normalization: Complex64,
}

impl CorrelationFamily {
    pub fn new(sys: &GaborSystem) -> CorrelationFamily {
        let range = correlation_range(sys);
        let members = (0..range.len()).into_par_iter().map(|i| correlation_fn(sys, &range.at(i))).collect();
        CorrelationFamily {
            range,
            members,
            a: sys.a(),
            shift_steps: sys.shift_steps(),
            normalization: sys.normalization(),
        }
    }

    pub fn range(&self) -> &IndexBox {
        &self.range
    }

    pub fn get(&self, n: &Steps) -> Option<&CellFunction> {
        self.range.flat(n).map(|i| &self.members[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Steps, &CellFunction)> {
        self.range.iter().zip(&self.members)
    }

    fn dim(&self) -> usize {
        self.range.dim()
    }

    /// `(1/⟨γ,g⟩) Σ_n a^d G_n(x) f(x - n/b)` over the members accepted by `keep`.
    fn apply_filtered(&self, f: &GridFunction, keep: impl Fn(&Steps) -> bool + Sync) -> GridFunction {
        let grid = *f.grid();
        let dim = self.dim();
        let scale = self.a.powi(dim as i32) / self.normalization;
        let active: Vec<(Steps, &CellFunction)> =
            self.iter().filter(|(n, g)| keep(n) && g.values().iter().any(|v| *v != ZERO)).collect();
        let values: Vec<Complex64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.steps_at(i);
                let mut acc = ZERO;
                for (n, gn) in &active {
                    let mut src = x;
                    for a in 0..dim {
                        src[a] -= n[a] * self.shift_steps;
                    }
                    let fv = f.at_steps(&src);
                    if fv != ZERO {
                        acc += gn.at(&x) * fv;
                    }
                }
                acc * scale
            })
            .collect();
        GridFunction::from_values(grid, values).expect("same grid")
    }

    /// Walnut representation of `S f`.
    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        self.apply_filtered(f, |_| true)
    }

    /// The `n ≠ 0` part, `R f`.
    pub fn apply_off_diagonal(&self, f: &GridFunction) -> GridFunction {
        self.apply_filtered(f, |n| n.iter().any(|&c| c != 0))
    }

    /// `G_a = a^d/⟨γ,g⟩ · G_{a,b;0}`.
    pub fn diagonal(&self) -> CellFunction {
        let scale = self.a.powi(self.dim() as i32) / self.normalization;
        let zero = [0; MAX_DIM];
        match self.get(&zero) {
            Some(g0) => g0.map(|v| v * scale),
            None => {
                let period = self.members.first().map(|m| m.period_steps()).unwrap_or(1);
                CellFunction::from_samples(self.dim(), period, vec![ZERO; (period as usize).pow(self.dim() as u32)])
            }
        }
    }
}

fn check_pair(sys: &GaborSystem) -> Result<()> {
    let n = sys.normalization().norm();
    if n <= DEGENERATE_TOL {
        return Err(GaborError::DegeneratePair(n));
    }
    Ok(())
}

/// `G_a = a^d/⟨γ,g⟩ · G_{a,b;0}` on the cell.
pub fn g_a(sys: &GaborSystem) -> Result<CellFunction> {
    check_pair(sys)?;
    let g0 = correlation_fn(sys, &[0; MAX_DIM]);
    let scale = sys.a().powi(sys.dim() as i32) / sys.normalization();
    Ok(g0.map(|v| v * scale))
}

/// `‖G_a - 1‖_∞`.
pub fn g_a_deviation(sys: &GaborSystem) -> Result<f64> {
    Ok(g_a(sys)?.map(|v| v - 1.0).sup_norm())
}

/// Upper bound `(1+a)^d ‖conj(g)·γ‖_W / |⟨γ,g⟩|` on `‖G_a - 1‖_∞` at the system's `a`.
pub fn m0_bound(sys: &GaborSystem) -> Result<f64> {
    check_pair(sys)?;
    let product = sys.g().map(|v| v.conj()).mul(sys.gamma())?;
    Ok((1.0 + sys.a()).powi(sys.dim() as i32) * wiener_norm(&product) / sys.normalization().norm())
}

/// `(S f)(x) = (1/⟨γ,g⟩) Σ_n a^d G_{a,b;n}(x) f(x - n/b)`. Exact: no frequency truncation.
pub fn walnut_apply(f: &GridFunction, sys: &GaborSystem) -> Result<GridFunction> {
    check_pair(sys)?;
    f.check_grid(sys.g())?;
    Ok(CorrelationFamily::new(sys).apply(f))
}

/// `T f = (G_a - 1) f`.
pub fn apply_t(f: &GridFunction, sys: &GaborSystem) -> Result<GridFunction> {
    f.check_grid(sys.g())?;
    let ga = g_a(sys)?;
    let grid = *f.grid();
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (ga.at(&grid.steps_at(i)) - 1.0) * v)
        .collect();
    GridFunction::from_values(grid, values)
}

/// `R f = (1/⟨γ,g⟩) Σ_{n≠0} a^d G_{a,b;n} f(· - n/b)`.
pub fn apply_r(f: &GridFunction, sys: &GaborSystem) -> Result<GridFunction> {
    check_pair(sys)?;
    f.check_grid(sys.g())?;
    Ok(CorrelationFamily::new(sys).apply_off_diagonal(f))
}

/// `a^d/|⟨γ,g⟩| (1+1/a)^d (2+2b)^d ‖g‖_W ‖γ‖_W`, a bound on `‖S‖` over every `W(L^p,ℓ^q)`.
pub fn operator_norm_upper_bound(sys: &GaborSystem, _pq: ExponentPair) -> f64 {
    let d = sys.dim() as i32;
    let (a, b) = (sys.a(), sys.b());
    // a^d (1 + 1/a)^d = (1 + a)^d
    (1.0 + a).powi(d) * (2.0 + 2.0 * b).powi(d) * wiener_norm(sys.g()) * wiener_norm(sys.gamma())
        / sys.normalization().norm()
}

/// Pointwise sum of translates `Σ_n |g(x - an)|` over the cell, checked against `(1+1/a)^d ‖g‖_W`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslateSum {
    pub values: Vec<f64>,
    pub max: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn sum_translates(g: &GridFunction, a: f64) -> Result<TranslateSum> {
    let grid = *g.grid();
    let dim = grid.dim();
    let a_steps = grid.steps_of(a)?;
    if a_steps < 1 {
        return Err(GaborError::InvalidParameter(format!("a = {a} must be positive")));
    }
    let bound = (1.0 + 1.0 / a).powi(dim as i32) * wiener_norm(g);
    let Some(sup) = g.support_box() else {
        return Ok(TranslateSum { values: vec![0.0; (a_steps as usize).pow(dim as u32)], max: 0.0, bound, holds: true });
    };
    let cell = IndexBox::uniform(dim, 0, a_steps - 1);
    let values: Vec<f64> = cell
        .iter()
        .map(|c| {
            let mut lo = [0; MAX_DIM];
            let mut hi = [0; MAX_DIM];
            for ax in 0..dim {
                lo[ax] = div_ceil(c[ax] - sup.hi()[ax], a_steps);
                hi[ax] = (c[ax] - sup.lo()[ax]).div_euclid(a_steps);
            }
            IndexBox::new(dim, lo, hi)
                .iter()
                .map(|n| {
                    let mut y = c;
                    for ax in 0..dim {
                        y[ax] -= n[ax] * a_steps;
                    }
                    g.at_steps(&y).norm()
                })
                .sum()
        })
        .collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    Ok(TranslateSum { values, max, bound, holds: max <= bound * (1.0 + 1e-12) })
}

/// Correlation sums of a system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSum {
    /// `Σ_{n≠0} a^d ‖G_{a,b;n}‖_∞`.
    pub tail: f64,
    /// `Σ_n ‖G_{a,b;n}‖_∞`, all `n`.
    pub full_sum: f64,
    /// `(1+1/a)^d (2+2b)^d ‖g‖_W ‖γ‖_W`.
    pub bound: f64,
    pub within_bound: bool,
}

pub fn tail_sum(sys: &GaborSystem) -> TailSum {
    tail_sum_of(&CorrelationFamily::new(sys), sys)
}

pub fn tail_sum_of(family: &CorrelationFamily, sys: &GaborSystem) -> TailSum {
    let d = sys.dim() as i32;
    let ad = sys.a().powi(d);
    let mut tail = 0.0;
    let mut full = 0.0;
    for (n, g) in family.iter() {
        let s = g.sup_norm();
        full += s;
        if n.iter().any(|&c| c != 0) {
            tail += ad * s;
        }
    }
    let bound = (1.0 + 1.0 / sys.a()).powi(d)
        * (2.0 + 2.0 * sys.b()).powi(d)
        * wiener_norm(sys.g())
        * wiener_norm(sys.gamma());
    TailSum { tail, full_sum: full, bound, within_bound: full <= bound * (1.0 + 1e-12) }
}
