//! Parameter sweeps toward the dense-lattice limit `(a, b) → (0, 0)`.
//!
//! Each driver returns a report whose records are in schedule order and
//! depend only on the inputs, never on the thread count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amalgam::{amalgam_norm, lp_norm, Exponent, ExponentPair};
use crate::error::{GaborError, Result};
use crate::gabor::GaborSystem;
use crate::grid::{inner_product, Grid, GridFunction, GridSpec, IndexBox, MAX_DIM};
use crate::signal::{sample_signal, SignalSpec};
use crate::sum::pairwise_sum_complex;
use crate::walnut::{g_a, operator_norm_upper_bound, tail_sum_of, CorrelationFamily};
use crate::window::{sample_window, WindowSpec};

/// Trend acceptance: last value over first value must fall below this.
pub const TREND_RATIO_LIMIT: f64 = 0.2;

/// Relative rounding allowance in the per-record decomposition bound.
const BOUND_SLACK: f64 = 1e-12;

/// `(a_j, b_j) = (2^{-j}, 2^{-j})`.
pub fn dyadic_pairs(js: impl IntoIterator<Item = i32>) -> Vec<[f64; 2]> {
    js.into_iter().map(|j| [0.5f64.powi(j), 0.5f64.powi(j)]).collect()
}

/// `(a_j, b_j) = (2^{-j}, 3^{-j})`; `1/b_j = 3^j` is commensurate with any grid.
pub fn anisotropic_pairs(js: impl IntoIterator<Item = i32>) -> Vec<[f64; 2]> {
    js.into_iter().map(|j| [0.5f64.powi(j), 3.0f64.powi(-j)]).collect()
}

/// Windows, test function and lattice schedule of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSchedule {
    pub grid: GridSpec,
    pub g: WindowSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<WindowSpec>,
    pub f: SignalSpec,
    pub p: Exponent,
    pub q: Exponent,
    /// `(a_j, b_j)`, both strictly decreasing.
    pub pairs: Vec<[f64; 2]>,
    /// Fixed functions `h` for the pairing column `max_h |⟨S f - f, h⟩|`.
    #[serde(default)]
    pub dual_tests: Vec<SignalSpec>,
}

struct Prepared {
    f: GridFunction,
    duals: Vec<GridFunction>,
    systems: Vec<GaborSystem>,
}

impl SweepSchedule {
    pub fn exponents(&self) -> ExponentPair {
        ExponentPair::new(self.p, self.q)
    }

    /// Checks ordering, commensurability and the boundary margin.
    pub fn validate(&self) -> Result<()> {
        self.prepare(true).map(|_| ())
    }

    fn prepare(&self, check_margin: bool) -> Result<Prepared> {
        if self.pairs.is_empty() {
            return Err(GaborError::Configuration("schedule has no (a, b) pairs".into()));
        }
        for w in self.pairs.windows(2) {
            if !(w[1][0] < w[0][0] && w[1][1] < w[0][1]) {
                return Err(GaborError::Configuration(format!(
                    "a and b must be strictly decreasing: ({}, {}) follows ({}, {})",
                    w[1][0], w[1][1], w[0][0], w[0][1]
                )));
            }
        }
        let grid = Grid::from_spec(&self.grid)?;
        let g = sample_window(&self.g, &grid)?;
        let gamma = sample_window(&self.gamma.unwrap_or(self.g), &grid)?;
        let f = sample_signal(&self.f, &grid)?;
        let duals = if self.dual_tests.is_empty() {
            default_duals(&grid)?
        } else {
            self.dual_tests.iter().map(|s| sample_signal(s, &grid)).collect::<Result<_>>()?
        };
        let systems: Vec<GaborSystem> = self
            .pairs
            .iter()
            .map(|&[a, b]| GaborSystem::new(g.clone(), gamma.clone(), a, b))
            .collect::<Result<_>>()?;
        if check_margin {
            check_boundary_margin(&grid, &f, &systems)?;
        }
        Ok(Prepared { f, duals, systems })
    }
}

fn default_duals(grid: &Grid) -> Result<Vec<GridFunction>> {
    [
        SignalSpec::Gaussian { center: 0.0, sigma: 1.0, radius: 4.0 },
        SignalSpec::Indicator { left: 0.0, right: 1.0, closed: false },
    ]
    .iter()
    .map(|s| sample_signal(s, grid))
    .collect()
}

/// Distance from `supp f` to the grid edge must be at least
/// `sup_j (1/b_j) + diam supp g + diam supp γ` on every axis.
fn check_boundary_margin(grid: &Grid, f: &GridFunction, systems: &[GaborSystem]) -> Result<()> {
    let Some(fs) = f.support_box() else {
        return Ok(());
    };
    let sys = &systems[0];
    let dim = grid.dim();
    let max_shift = systems.iter().map(|s| s.shift_steps()).max().unwrap_or(0);
    let (lo, hi) = grid.step_bounds();
    for a in 0..dim {
        let diam = (sys.g_support().hi()[a] - sys.g_support().lo()[a])
            + (sys.gamma_support().hi()[a] - sys.gamma_support().lo()[a]);
        let margin = max_shift + diam;
        let room = (fs.lo()[a] - lo).min(hi - fs.hi()[a]);
        if room < margin {
            let h = grid.spacing();
            return Err(GaborError::Configuration(format!(
                "test function is {} from the grid boundary on axis {}, needs at least {} (max 1/b plus window diameters)",
                room as f64 * h,
                a + 1,
                margin as f64 * h
            )));
        }
    }
    Ok(())
}

/// One lattice point of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub a: f64,
    pub b: f64,
    /// `‖S f - f‖_{W(L^p,ℓ^q)}`.
    pub err_f: f64,
    /// `‖G_a - 1‖_∞`.
    pub g_a_dev: f64,
    /// `Σ_{n≠0} a^d ‖G_{a,b;n}‖_∞`.
    pub tail: f64,
    pub norm_bound: f64,
    /// `max_h |⟨S f - f, h⟩|` over the dual test set.
    pub pairing: f64,
    /// `‖f‖_{W(L^p,ℓ^q)}`.
    pub f_norm: f64,
    /// `err_f ≤ (g_a_dev + tail/|⟨γ,g⟩|) ‖f‖ + residue`.
    pub bound_holds: bool,
    /// Seconds; kept out of the CSV so that reruns compare byte for byte.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub exponents: ExponentPair,
    pub records: Vec<SweepRecord>,
    /// Last `err_f` over first `err_f` (`0` if both vanish).
    pub trend_ratio: f64,
    pub strictly_decreasing: bool,
    pub bounds_hold: bool,
    pub passed: bool,
}

impl SweepReport {
    pub const CSV_HEADER: [&'static str; 9] =
        ["a", "b", "err_f", "g_a_dev", "tail", "norm_bound", "pairing", "f_norm", "bound_holds"];

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    r.a,
                    r.b,
                    r.err_f,
                    r.g_a_dev,
                    r.tail,
                    r.norm_bound,
                    r.pairing,
                    r.f_norm,
                    if r.bound_holds { 1.0 } else { 0.0 },
                ]
            })
            .collect()
    }
}

/// Last over first, with `0/0 = 0`.
pub fn trend_ratio(values: &[f64]) -> f64 {
    match (values.first(), values.last()) {
        (Some(&first), Some(&last)) if first > 0.0 => last / first,
        (Some(_), Some(0.0)) => 0.0,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => f64::NAN,
    }
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

/// `‖S f - f‖_{W(L^p,ℓ^q)}` along the schedule via the Walnut form.
pub fn convergence_sweep(schedule: &SweepSchedule) -> Result<SweepReport> {
    let prep = schedule.prepare(true)?;
    let pq = schedule.exponents();
    let f_norm = amalgam_norm(&prep.f, pq);
    let records: Vec<SweepRecord> = prep
        .systems
        .par_iter()
        .map(|sys| {
            let start = Instant::now();
            let family = CorrelationFamily::new(sys);
            let diff = &family.apply(&prep.f) - &prep.f;
            let err_f = amalgam_norm(&diff, pq);
            let g_a_dev = family.diagonal().map(|v| v - 1.0).sup_norm();
            let tail = tail_sum_of(&family, sys).tail;
            let pairing = prep
                .duals
                .iter()
                .map(|h| inner_product(&diff, h).map(|c| c.norm()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let bound = (g_a_dev + tail / sys.normalization().norm()) * f_norm;
            Ok(SweepRecord {
                a: sys.a(),
                b: sys.b(),
                err_f,
                g_a_dev,
                tail,
                norm_bound: operator_norm_upper_bound(sys, pq),
                pairing,
                f_norm,
                bound_holds: err_f <= bound + BOUND_SLACK * f_norm,
                wall_time: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    let errs: Vec<f64> = records.iter().map(|r| r.err_f).collect();
    let ratio = trend_ratio(&errs);
    let bounds_hold = records.iter().all(|r| r.bound_holds);
    Ok(SweepReport {
        exponents: pq,
        trend_ratio: ratio,
        strictly_decreasing: strictly_decreasing(&errs),
        bounds_hold,
        passed: ratio < TREND_RATIO_LIMIT && bounds_hold,
        records,
    })
}

/// Operator-norm proxies for `‖S - I‖` from the `T + R` split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormRecord {
    pub a: f64,
    pub b: f64,
    pub g_a_dev: f64,
    pub tail: f64,
    /// `g_a_dev + tail/|⟨γ,g⟩|`.
    pub upper: f64,
    /// `g_a_dev - tail/|⟨γ,g⟩|`.
    pub lower: f64,
    pub norm_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormReport {
    pub records: Vec<OpNormRecord>,
    /// Last over first of the upper proxy.
    pub trend_ratio: f64,
}

pub fn opnorm_sweep(schedule: &SweepSchedule) -> Result<OpNormReport> {
    let prep = schedule.prepare(false)?;
    let pq = schedule.exponents();
    let records: Vec<OpNormRecord> = prep
        .systems
        .par_iter()
        .map(|sys| {
            let family = CorrelationFamily::new(sys);
            let g_a_dev = family.diagonal().map(|v| v - 1.0).sup_norm();
            let tail = tail_sum_of(&family, sys).tail;
            let r = tail / sys.normalization().norm();
            OpNormRecord {
                a: sys.a(),
                b: sys.b(),
                g_a_dev,
                tail,
                upper: g_a_dev + r,
                lower: g_a_dev - r,
                norm_bound: operator_norm_upper_bound(sys, pq),
            }
        })
        .collect();
    let uppers: Vec<f64> = records.iter().map(|r| r.upper).collect();
    Ok(OpNormReport { trend_ratio: trend_ratio(&uppers), records })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannRecord {
    pub a: f64,
    /// `max_y |a^d Σ_n f(y + na) - h^d Σ f|` over cell samples `y`.
    pub deviation: f64,
}

/// Uniformity of lattice Riemann sums over every shift in the cell.
pub fn riemann_uniformity(f: &GridFunction, a_list: &[f64]) -> Result<Vec<RiemannRecord>> {
    let grid = *f.grid();
    let dim = grid.dim();
    let integral = pairwise_sum_complex(f.values()) * grid.cell_measure();
    a_list
        .par_iter()
        .map(|&a| {
            let big_a = grid.steps_of(a)?;
            if big_a < 1 {
                return Err(GaborError::InvalidParameter(format!("a = {a} must be positive")));
            }
            let cell = IndexBox::uniform(dim, 0, big_a - 1);
            let mut buckets = vec![Vec::new(); cell.len()];
            for (i, v) in f.values().iter().enumerate() {
                let p = grid.steps_at(i);
                let mut r = [0; MAX_DIM];
                for ax in 0..dim {
                    r[ax] = p[ax].rem_euclid(big_a);
                }
                buckets[cell.flat(&r).expect("residue in cell")].push(*v);
            }
            let ad = a.powi(dim as i32);
            let deviation =
                buckets.iter().map(|b| (pairwise_sum_complex(b) * ad - integral).norm()).fold(0.0, f64::max);
            Ok(RiemannRecord { a, deviation })
        })
        .collect()
}

/// Maximizing `a` for one fat-Cantor depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub depth: u32,
    pub spacing: f64,
    pub a: f64,
    /// `‖(G_a - 1) χ_{[0,1]}‖_{W(L^∞,ℓ^q)}`.
    pub norm: f64,
    /// `1 - 2h`.
    pub threshold: f64,
    pub passed: bool,
    /// `(a, norm)` over the searched range.
    pub curve: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub q: Exponent,
    pub witnesses: Vec<Witness>,
    /// `(a, norm)` for `g = γ = χ_{[0,1)}` on the finest grid.
    pub contrast: Vec<[f64; 2]>,
    pub contrast_final: f64,
    /// Smallest witness norm over `contrast_final`; infinite when the contrast vanishes.
    pub separation: f64,
    pub passed: bool,
}

pub const CONTRAST_LIMIT: f64 = 0.05;
pub const SEPARATION_FACTOR: f64 = 10.0;

/// Grid spacing used for depth `k`: `4^{-k}/8`.
pub fn counterexample_spacing(depth: u32) -> f64 {
    0.25f64.powi(depth as i32) / 8.0
}

/// Searched `a = 2^{-j}` for depth `k`: from `1` down to the smallest gap `4^{-k}`.
pub fn counterexample_a_range(depth: u32) -> Vec<f64> {
    (0..=2 * depth as i32).map(|j| 0.5f64.powi(j)).collect()
}

/// `sup`-deviation witnesses for `g = γ = χ_{E_k}` against `f_0 = χ_{[0,1]}`.
pub fn counterexample_run(depths: &[u32], q: Exponent) -> Result<CounterexampleReport> {
    counterexample_run_with_spacing(depths, q, None)
}

/// As [`counterexample_run`], optionally forcing one spacing for every depth.
pub fn counterexample_run_with_spacing(depths: &[u32], q: Exponent, spacing: Option<f64>) -> Result<CounterexampleReport> {
    if depths.is_empty() {
        return Err(GaborError::Configuration("no depths given".into()));
    }
    let pq = ExponentPair::new(Exponent::Infinity, q);
    let f0 = SignalSpec::Indicator { left: 0.0, right: 1.0, closed: true };

    let witnesses: Vec<Witness> = depths
        .iter()
        .map(|&k| {
            if k == 0 || k > 24 {
                return Err(GaborError::InvalidParameter(format!("depth {k} outside 1..=24")));
            }
            let h = spacing.unwrap_or_else(|| counterexample_spacing(k));
            let required = 0.25f64.powi(k as i32) / 4.0;
            if h > required {
                return Err(GaborError::Resolution { h, depth: k, required });
            }
            let grid = Grid::new(1, h, 2.0)?;
            let window = sample_window(&WindowSpec::FatCantor { depth: k }, &grid)?;
            let f = sample_signal(&f0, &grid)?;
            let curve = deviation_curve(&window, &f, &counterexample_a_range(k), pq)?;
            // ties go to the smaller a
            let best = curve.iter().fold(curve[0], |b, c| if c[1] >= b[1] { *c } else { b });
            let threshold = 1.0 - 2.0 * h;
            Ok(Witness { depth: k, spacing: h, a: best[0], norm: best[1], threshold, passed: best[1] >= threshold, curve })
        })
        .collect::<Result<_>>()?;

    let finest = witnesses.iter().map(|w| w.spacing).fold(f64::INFINITY, f64::min);
    let deepest = *depths.iter().max().unwrap();
    let grid = Grid::new(1, finest, 2.0)?;
    let chi = sample_window(&WindowSpec::IndicatorCube { side: 1.0 }, &grid)?;
    let f = sample_signal(&f0, &grid)?;
    let contrast = deviation_curve(&chi, &f, &counterexample_a_range(deepest), pq)?;
    let contrast_final = contrast.last().map(|c| c[1]).unwrap_or(0.0);
    let weakest = witnesses.iter().map(|w| w.norm).fold(f64::INFINITY, f64::min);
    let separation = if contrast_final > 0.0 { weakest / contrast_final } else { f64::INFINITY };
    let passed = witnesses.iter().all(|w| w.passed) && contrast_final < CONTRAST_LIMIT && separation >= SEPARATION_FACTOR;
    Ok(CounterexampleReport { q, witnesses, contrast, contrast_final, separation, passed })
}

/// `(a, ‖(G_a - 1) f‖_{W(L^p,ℓ^q)})` for `g = γ = window`.
fn deviation_curve(window: &GridFunction, f: &GridFunction, a_list: &[f64], pq: ExponentPair) -> Result<Vec<[f64; 2]>> {
    a_list
        .par_iter()
        .map(|&a| {
            let sys = GaborSystem::new(window.clone(), window.clone(), a, 1.0)?;
            let prod = multiply_by_g_a_minus_one(f, &sys)?;
            Ok([a, amalgam_norm(&prod, pq)])
        })
        .collect()
}

fn multiply_by_g_a_minus_one(f: &GridFunction, sys: &GaborSystem) -> Result<GridFunction> {
    let ga = g_a(sys)?;
    let grid = *f.grid();
    let values = f.values().iter().enumerate().map(|(i, v)| (ga.at(&grid.steps_at(i)) - 1.0) * v).collect();
    GridFunction::from_values(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierDecayRecord {
    pub a: f64,
    /// `‖(G_a - 1) f‖_p`.
    pub norm: f64,
    /// The same quantity as `‖·‖_{W(L^p,ℓ^p)}`.
    pub amalgam_pp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierDecayReport {
    pub p: Exponent,
    pub records: Vec<MultiplierDecayRecord>,
    pub trend_ratio: f64,
}

/// `‖(G_a - 1) f‖_p` for decreasing `a`.
pub fn multiplier_decay_sweep(g: &GridFunction, gamma: &GridFunction, f: &GridFunction, p: Exponent, a_list: &[f64]) -> Result<MultiplierDecayReport> {
    let records: Vec<MultiplierDecayRecord> = a_list
        .par_iter()
        .map(|&a| {
            let sys = GaborSystem::new(g.clone(), gamma.clone(), a, 1.0)?;
            let prod = multiply_by_g_a_minus_one(f, &sys)?;
            Ok(MultiplierDecayRecord { a, norm: lp_norm(&prod, p), amalgam_pp: amalgam_norm(&prod, ExponentPair::new(p, p)) })
        })
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = records.iter().map(|r| r.norm).collect();
    Ok(MultiplierDecayReport { p, trend_ratio: trend_ratio(&norms), records })
}
