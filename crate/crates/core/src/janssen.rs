//! Janssen coefficients `c_{l,n} = ⟨γ, M_{l/a} T_{n/b} g⟩`, the Janssen
//! representation of the frame operator and the Wexler–Raz test.
//!
//! On a grid with `a = A·h` the frequencies `l/a` are `A`-periodic in `l`, so
//! a lattice may hold at most one period: `2L + 1 ≤ A` per axis.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GaborError, Result};
use crate::gabor::{div_ceil, phase_index, roots_of_unity, GaborSystem, DEGENERATE_TOL};
use crate::grid::{inner_product, GridFunction, IndexBox, Steps, MAX_DIM};
use crate::sum::{pairwise_sum, pairwise_sum_complex};
use crate::walnut::CellFunction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Truncated table of Janssen coefficients for `|l|_∞ ≤ L`, `|n|_∞ ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct JanssenLattice {
    l_range: IndexBox,
    n_range: IndexBox,
    /// Row-major by `n`, then `l`.
    entries: Vec<Complex64>,
    a: f64,
    b: f64,
    a_steps: i64,
    shift_steps: i64,
    normalization: Complex64,
    tail_mass: f64,
}

impl JanssenLattice {
    pub fn l_range(&self) -> &IndexBox {
        &self.l_range
    }

    pub fn n_range(&self) -> &IndexBox {
        &self.n_range
    }

    pub fn dim(&self) -> usize {
        self.l_range.dim()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `⟨γ, g⟩` of the originating system.
    pub fn normalization(&self) -> Complex64 {
        self.normalization
    }

    /// `Σ |c_{l,n}|` over the outermost shell of the stored ranges.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn get(&self, l: &Steps, n: &Steps) -> Option<Complex64> {
        let i = self.n_range.flat(n)?;
        let j = self.l_range.flat(l)?;
        Some(self.entries[i * self.l_range.len() + j])
    }

    /// Iterates `(l, n, c)` with `n` outer, both in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Steps, Steps, Complex64)> + '_ {
        let ll = self.l_range.len();
        self.entries.iter().enumerate().map(move |(i, c)| (self.l_range.at(i % ll), self.n_range.at(i / ll), *c))
    }

    /// `Σ |c_{l,n}|` over all stored entries.
    pub fn absolute_sum(&self) -> f64 {
        let abs: Vec<f64> = self.entries.iter().map(|c| c.norm()).collect();
        pairwise_sum(&abs)
    }
}

fn shell(l: &Steps, n: &Steps, dim: usize) -> i64 {
    (0..dim).map(|a| l[a].abs().max(n[a].abs())).max().unwrap_or(0)
}

/// Largest `L` that keeps the frequency range within one period.
pub fn max_frequency_index(sys: &GaborSystem) -> i64 {
    (sys.a_steps() - 1) / 2
}

/// Coefficients `⟨γ, M_{l/a} T_{n/b} g⟩` for `|l|_∞ ≤ L`, `|n|_∞ ≤ N`.
pub fn janssen_coefficients(sys: &GaborSystem, l_max: i64, n_max: i64) -> Result<JanssenLattice> {
    if l_max < 0 || n_max < 0 {
        return Err(GaborError::InvalidParameter(format!("L = {l_max} and N = {n_max} must be nonnegative")));
    }
    let limit = max_frequency_index(sys);
    if l_max > limit {
        return Err(GaborError::Range(format!(
            "L = {l_max} exceeds {limit}: frequencies l/a alias on a grid with a/h = {}",
            sys.a_steps()
        )));
    }
    let grid = *sys.grid();
    let dim = grid.dim();
    let a_steps = sys.a_steps();
    let k = sys.shift_steps();
    let roots = roots_of_unity(a_steps);
    let l_range = IndexBox::uniform(dim, -l_max, l_max);
    let n_range = IndexBox::uniform(dim, -n_max, n_max);
    let cell = grid.cell_measure();

    let rows: Vec<Vec<Complex64>> = (0..n_range.len())
        .into_par_iter()
        .map(|i| {
            let n = n_range.at(i);
            let mut shift = [0; MAX_DIM];
            for a in 0..dim {
                shift[a] = n[a] * k;
            }
            let window = sys.gamma_support().intersect(&sys.g_support().shifted(&shift));
            let products: Vec<(Steps, Complex64)> = window
                .iter()
                .filter_map(|y| {
                    let mut src = y;
                    for a in 0..dim {
                        src[a] -= shift[a];
                    }
                    let v = sys.gamma().at_steps(&y) * sys.g().at_steps(&src).conj();
                    (v != ZERO).then_some((y, v))
                })
                .collect();
            let mut buf = Vec::with_capacity(products.len());
            l_range
                .iter()
                .map(|l| {
                    buf.clear();
                    buf.extend(products.iter().map(|(y, v)| v * roots[phase_index(&l, y, dim, a_steps)].conj()));
                    pairwise_sum_complex(&buf) * cell
                })
                .collect()
        })
        .collect();
    let mut entries: Vec<Complex64> = rows.into_iter().flatten().collect();

    // the origin entry is the pairing itself
    let origin = n_range.flat(&[0; MAX_DIM]).unwrap() * l_range.len() + l_range.flat(&[0; MAX_DIM]).unwrap();
    entries[origin] = inner_product(sys.gamma(), sys.g())?;

    let outer = l_max.max(n_max);
    let tail: Vec<f64> = n_range
        .iter()
        .flat_map(|n| l_range.iter().map(move |l| (l, n)))
        .zip(&entries)
        .filter(|((l, n), _)| shell(l, n, dim) == outer)
        .map(|(_, c)| c.norm())
        .collect();

    Ok(JanssenLattice {
        l_range,
        n_range,
        entries,
        a: sys.a(),
        b: sys.b(),
        a_steps,
        shift_steps: k,
        normalization: sys.normalization(),
        tail_mass: pairwise_sum(&tail),
    })
}

/// Cumulative `Σ |c_{l,n}|` over square shells `max(|l|_∞, |n|_∞) ≤ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSums {
    pub partial_sums: Vec<f64>,
    /// Heuristic only: the last shell adds less than `1e-6` of the total.
    pub satisfied_heuristic: bool,
}

pub const SHELL_DECAY_RATIO: f64 = 1e-6;

/// Shell-by-shell partial sums of `Σ |⟨γ, M_{l/a} T_{n/b} g⟩|`.
///
/// Frequency indices stop at one period (`|l| ≤ (a/h - 1)/2`); past that the
/// shells grow in `n` only.
pub fn condition_a_prime(sys: &GaborSystem, max_shell: i64) -> Result<ShellSums> {
    let max_shell = max_shell.max(0);
    let l_max = max_shell.min(max_frequency_index(sys));
    let lattice = janssen_coefficients(sys, l_max, max_shell)?;
    let dim = lattice.dim();
    let mut per_shell = vec![Vec::new(); max_shell as usize + 1];
    for (l, n, c) in lattice.iter() {
        per_shell[shell(&l, &n, dim) as usize].push(c.norm());
    }
    let mut partial_sums = Vec::with_capacity(per_shell.len());
    let mut total = 0.0;
    let mut last = 0.0;
    for s in &per_shell {
        last = pairwise_sum(s);
        total += last;
        partial_sums.push(total);
    }
    let satisfied_heuristic = max_shell > 0 && last < SHELL_DECAY_RATIO * total;
    Ok(ShellSums { partial_sums, satisfied_heuristic })
}

fn check_normalization(norm: Complex64) -> Result<()> {
    if norm.norm() <= DEGENERATE_TOL {
        return Err(GaborError::DegeneratePair(norm.norm()));
    }
    Ok(())
}

/// `(1/⟨γ,g⟩) Σ_{l,n} c_{l,n} M_{l/a} T_{n/b} f`, over the stored ranges.
pub fn janssen_apply(f: &GridFunction, lattice: &JanssenLattice) -> Result<GridFunction> {
    apply_ordered(f, lattice, false)
}

/// Same operator, written with `T_{n/b} M_{l/a}` and the reindexing phase
/// `c_{l,n} · e^{2πi⟨n/b, l/a⟩}`.
pub fn janssen_apply_tm(f: &GridFunction, lattice: &JanssenLattice) -> Result<GridFunction> {
    apply_ordered(f, lattice, true)
}

fn apply_ordered(f: &GridFunction, lattice: &JanssenLattice, translate_first: bool) -> Result<GridFunction> {
    check_normalization(lattice.normalization)?;
    let grid = *f.grid();
    let dim = grid.dim();
    if dim != lattice.dim() {
        return Err(GaborError::IncompatibleGrids);
    }
    let big_a = lattice.a_steps;
    let k = lattice.shift_steps;
    if (grid.spacing() * big_a as f64 - lattice.a).abs() > 1e-9 * lattice.a {
        return Err(GaborError::IncompatibleGrids);
    }
    let roots = roots_of_unity(big_a);
    let norm = lattice.normalization;
    let terms: Vec<(Steps, Steps, Complex64)> = lattice
        .iter()
        .filter(|(_, _, c)| *c != ZERO)
        .map(|(l, n, c)| {
            let c = if translate_first {
                // ⟨n/b, l/a⟩ = Σ n_j K l_j / A
                let mut nk = [0; MAX_DIM];
                for a in 0..dim {
                    nk[a] = n[a] * k;
                }
                c * roots[phase_index(&l, &nk, dim, big_a)]
            } else {
                c
            };
            (l, n, c / norm)
        })
        .collect();

    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.steps_at(i);
            let mut acc = ZERO;
            for (l, n, c) in &terms {
                let mut src = x;
                for a in 0..dim {
                    src[a] -= n[a] * k;
                }
                let fv = f.at_steps(&src);
                if fv == ZERO {
                    continue;
                }
                // M T: phase at x; T M: phase at x - n/b
                let at = if translate_first { &src } else { &x };
                acc += c * roots[phase_index(l, at, dim, big_a)] * fv;
            }
            acc
        })
        .collect();
    GridFunction::from_values(grid, values)
}

/// `e^{2πi⟨t,ω⟩}`, so that `M_ω T_t = e^{2πi⟨t,ω⟩} T_t M_ω`.
pub fn commutation_phase(t: &[f64], omega: &[f64]) -> Complex64 {
    let turns: f64 = t.iter().zip(omega).map(|(a, b)| a * b).sum();
    crate::grid::unit_phase(turns)
}

/// Partial Fourier synthesis `a^{-d} Σ_l c_{l,n} e^{2πi⟨l, x/a⟩}` on the cell `[0,a)^d`.
pub fn fourier_reconstruct_g(lattice: &JanssenLattice, n: &Steps) -> Result<CellFunction> {
    if !lattice.n_range.contains(n) {
        return Err(GaborError::Range(format!("row n = {:?} is not stored", &n[..lattice.dim()])));
    }
    let dim = lattice.dim();
    let big_a = lattice.a_steps;
    let roots = roots_of_unity(big_a);
    let scale = lattice.a.powi(dim as i32).recip();
    let cell = IndexBox::uniform(dim, 0, big_a - 1);
    let row: Vec<(Steps, Complex64)> = lattice.l_range.iter().map(|l| (l, lattice.get(&l, n).unwrap())).collect();
    let values = cell
        .iter()
        .map(|x| {
            let terms: Vec<Complex64> =
                row.iter().map(|(l, c)| c * roots[phase_index(l, &x, dim, big_a)]).collect();
            pairwise_sum_complex(&terms) * scale
        })
        .collect();
    Ok(CellFunction::from_samples(dim, big_a, values))
}

/// Result of the Wexler–Raz test at fixed `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WexlerRaz {
    /// `c_{l,n} / ⟨γ,g⟩`.
    pub normalized: JanssenLattice,
    pub is_biorthogonal: bool,
    pub max_offdiag: f64,
    /// `c_{0,0} / ⟨γ,g⟩`.
    pub diag: Complex64,
}

pub const WEXLER_RAZ_TOL_EXACT: f64 = 1e-10;
pub const WEXLER_RAZ_TOL_GAUSSIAN: f64 = 1e-6;

/// Tests `c_{l,n}/⟨γ,g⟩ = δ_{l0} δ_{n0}` over `|l| ≤ L`, `|n| ≤ N` to within `tol`.
pub fn wexler_raz_check(sys: &GaborSystem, l_max: i64, n_max: i64, tol: f64) -> Result<WexlerRaz> {
    let pairing = inner_product(sys.gamma(), sys.g())?;
    check_normalization(pairing)?;
    let mut lattice = janssen_coefficients(sys, l_max, n_max)?;
    for c in lattice.entries.iter_mut() {
        *c /= pairing;
    }
    lattice.tail_mass /= pairing.norm();
    let origin = [0; MAX_DIM];
    let diag = lattice.get(&origin, &origin).unwrap();
    let dim = lattice.dim();
    let max_offdiag = lattice
        .iter()
        .filter(|(l, n, _)| shell(l, n, dim) != 0)
        .map(|(_, _, c)| c.norm())
        .fold(0.0, f64::max);
    let is_biorthogonal = (diag - 1.0).norm() <= tol && max_offdiag <= tol;
    Ok(WexlerRaz { normalized: lattice, is_biorthogonal, max_offdiag, diag })
}

/// Largest `| |c_{l,n}| - |c_{-l,-n}| |` over the stored ranges.
pub fn hermitian_defect(lattice: &JanssenLattice) -> f64 {
    let dim = lattice.dim();
    lattice
        .iter()
        .map(|(l, n, c)| {
            let mut ml = [0; MAX_DIM];
            let mut mn = [0; MAX_DIM];
            for a in 0..dim {
                ml[a] = -l[a];
                mn[a] = -n[a];
            }
            (c.norm() - lattice.get(&ml, &mn).unwrap().norm()).abs()
        })
        .fold(0.0, f64::max)
}

/// Number of `n` per axis needed to cover every nonzero row: `|n/b| ≤ diam`.
pub fn covering_n(sys: &GaborSystem) -> i64 {
    let k = sys.shift_steps();
    let (g, gam) = (sys.g_support(), sys.gamma_support());
    (0..sys.dim())
        .map(|a| {
            let reach = (gam.hi()[a] - g.lo()[a]).abs().max((g.hi()[a] - gam.lo()[a]).abs());
            div_ceil(reach, k)
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::apply_frame_direct;
    use crate::grid::{modulate, translate, Grid};
    use crate::walnut::{correlation_fn, walnut_apply};
    use crate::window::{sample_window, WindowSpec};

    const ORIGIN: Steps = [0; MAX_DIM];

    fn grid(m: usize, t: f64) -> Grid {
        Grid::new(1, 1.0 / m as f64, t).unwrap()
    }

    fn chi(g: &Grid) -> GridFunction {
        sample_window(&WindowSpec::IndicatorCube { side: 1.0 }, g).unwrap()
    }

    fn gauss(g: &Grid) -> GridFunction {
        sample_window(&WindowSpec::Gaussian { sigma: 1.0, radius: 4.0 }, g).unwrap()
    }

    fn test_fn(g: &Grid) -> GridFunction {
        GridFunction::from_fn(*g, |x| {
            let r = (1.0 - (x[0] - 0.5).abs() / 1.5).max(0.0);
            Complex64::new(r, 0.3 * r * x[0])
        })
    }

    #[test]
    fn entries_match_definition() {
        let g = grid(16, 6.0);
        let sys = GaborSystem::new(gauss(&g), sample_window(&WindowSpec::Bspline { order: 2 }, &g).unwrap(), 0.5, 1.0)
            .unwrap();
        let lat = janssen_coefficients(&sys, 3, 2).unwrap();
        assert_eq!(lat.get(&ORIGIN, &ORIGIN).unwrap(), inner_product(sys.gamma(), sys.g()).unwrap());
        for (l, n, c) in lat.iter() {
            let shifted = modulate(&translate(sys.g(), &[n[0] as f64]).unwrap(), &[l[0] as f64 / 0.5]).unwrap();
            let direct = inner_product(sys.gamma(), &shifted).unwrap();
            assert!((c - direct).norm() < 1e-13, "l={l:?} n={n:?}");
        }
    }

    #[test]
    fn indicator_lattice_is_delta() {
        let g = grid(16, 4.0);
        let sys = GaborSystem::new(chi(&g), chi(&g), 1.0, 1.0).unwrap();
        let lat = janssen_coefficients(&sys, 7, 3).unwrap();
        for (l, n, c) in lat.iter() {
            let expected = if l == ORIGIN && n == ORIGIN { 1.0 } else { 0.0 };
            assert!((c - expected).norm() < 1e-14);
        }
        let s = condition_a_prime(&sys, 4).unwrap();
        assert!((s.partial_sums[0] - 1.0).abs() < 1e-14);
        assert!(s.partial_sums.iter().all(|&v| (v - 1.0).abs() < 1e-13));

        let f = test_fn(&g);
        assert!(janssen_apply(&f, &lat).unwrap().max_abs_diff(&f).unwrap() < 1e-14);
        let one = fourier_reconstruct_g(&lat, &ORIGIN).unwrap();
        assert!(one.values().iter().all(|v| (v - 1.0).norm() < 1e-13));
    }

    #[test]
    fn aliasing_guard() {
        let g = grid(8, 4.0);
        let sys = GaborSystem::new(chi(&g), chi(&g), 0.5, 1.0).unwrap();
        assert_eq!(max_frequency_index(&sys), 1);
        assert!(janssen_coefficients(&sys, 1, 1).is_ok());
        assert!(matches!(janssen_coefficients(&sys, 2, 1), Err(GaborError::Range(_))));
    }

    #[test]
    fn gaussian_shells_decay() {
        let g = grid(64, 8.0);
        let sys = GaborSystem::new(gauss(&g), gauss(&g), 0.5, 0.5).unwrap();
        let s = condition_a_prime(&sys, 8).unwrap();
        assert!(s.satisfied_heuristic);
        assert!(s.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        let incr: Vec<f64> =
            std::iter::once(s.partial_sums[0]).chain(s.partial_sums.windows(2).map(|w| w[1] - w[0])).collect();
        for w in incr.windows(2) {
            assert!(w[1] <= w[0] || w[1] < 1e-15, "{incr:?}");
        }
    }

    #[test]
    fn cell_fourier_coefficients_match_entries() {
        let g = grid(32, 6.0);
        let sys =
            GaborSystem::new(gauss(&g), sample_window(&WindowSpec::Bspline { order: 3 }, &g).unwrap(), 0.5, 0.5)
                .unwrap();
        let lat = janssen_coefficients(&sys, 7, 6).unwrap();
        for n in lat.n_range().iter() {
            let cell = correlation_fn(&sys, &n);
            for l in lat.l_range().iter() {
                let q = cell.fourier_coefficient(&l);
                assert!((q - lat.get(&l, &n).unwrap() / 0.5).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn fourier_synthesis_converges() {
        let g = grid(64, 6.0);
        let sys = GaborSystem::new(gauss(&g), gauss(&g), 0.5, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for l in [1, 3, 6, 10, 15] {
            let lat = janssen_coefficients(&sys, l, 2).unwrap();
            let dist = fourier_reconstruct_g(&lat, &[1, 0, 0]).unwrap().l2_distance(&correlation_fn(&sys, &[1, 0, 0]), g.spacing());
            assert!(dist <= prev + 1e-15);
            prev = dist;
        }
        assert!(prev < 1e-6);
        let lat = janssen_coefficients(&sys, 3, 2).unwrap();
        assert!(fourier_reconstruct_g(&lat, &[3, 0, 0]).is_err());
    }

    #[test]
    fn janssen_matches_walnut_and_direct() {
        let g = grid(32, 8.0);
        let f = test_fn(&g);
        let sys = GaborSystem::new(gauss(&g), gauss(&g), 0.5, 0.5).unwrap();
        let lat = janssen_coefficients(&sys, 7, covering_n(&sys)).unwrap();
        let j = janssen_apply(&f, &lat).unwrap();
        let w = walnut_apply(&f, &sys).unwrap();
        let d = apply_frame_direct(&f, &sys).unwrap();
        assert!((&j - &w).norm_l2() <= 1e-6 * f.norm_l2());
        assert!((&j - &d).norm_l2() <= 1e-6 * f.norm_l2());
        assert!(janssen_apply(&GridFunction::zeros(g), &lat).unwrap().is_zero());
    }

    #[test]
    fn full_period_is_exact() {
        // a/h = 9 is odd, so l = -4..=4 is one full period of frequencies
        let g = Grid::new(1, 1.0 / 18.0, 6.0).unwrap();
        let f = test_fn(&g);
        let b2 = sample_window(&WindowSpec::Bspline { order: 2 }, &g).unwrap();
        let sys = GaborSystem::new(b2.clone(), b2, 0.5, 1.0).unwrap();
        let lat = janssen_coefficients(&sys, 4, covering_n(&sys)).unwrap();
        let j = janssen_apply(&f, &lat).unwrap();
        let w = walnut_apply(&f, &sys).unwrap();
        assert!((&j - &w).norm_l2() <= 1e-12 * f.norm_l2());
    }

    #[test]
    fn operator_orders_agree() {
        let g = grid(32, 6.0);
        let f = test_fn(&g);
        let sys = GaborSystem::new(gauss(&g), chi(&g), 0.25, 0.5).unwrap();
        let lat = janssen_coefficients(&sys, 3, 3).unwrap();
        let mt = janssen_apply(&f, &lat).unwrap();
        let tm = janssen_apply_tm(&f, &lat).unwrap();
        assert!(mt.max_abs_diff(&tm).unwrap() < 1e-12);
        let p = commutation_phase(&[2.0], &[0.25]);
        assert!((p - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermitian_moduli_for_self_dual() {
        let g = grid(32, 6.0);
        let b3 = sample_window(&WindowSpec::Bspline { order: 3 }, &g).unwrap();
        let sys = GaborSystem::new(b3.clone(), b3, 0.5, 0.5).unwrap();
        let lat = janssen_coefficients(&sys, 5, 3).unwrap();
        assert!(hermitian_defect(&lat) < 1e-10);
    }

    #[test]
    fn wexler_raz_examples() {
        let g = grid(16, 4.0);
        let sys = GaborSystem::new(chi(&g), chi(&g), 1.0, 1.0).unwrap();
        let wr = wexler_raz_check(&sys, 3, 3, WEXLER_RAZ_TOL_EXACT).unwrap();
        assert!(wr.is_biorthogonal);
        assert_eq!(wr.diag, Complex64::new(1.0, 0.0));

        let sys = GaborSystem::new(gauss(&g), gauss(&g), 0.5, 0.5).unwrap();
        let wr = wexler_raz_check(&sys, 3, 2, WEXLER_RAZ_TOL_GAUSSIAN).unwrap();
        assert!((wr.diag - 1.0).norm() < 1e-15);
        assert!(!wr.is_biorthogonal);
        // |⟨g, M_ω T_t g⟩| / ‖g‖² = exp(-π(t² + ω²)/2) for the unit gaussian; t = 2 or ω = 2
        assert!((wr.max_offdiag - (-2.0 * std::f64::consts::PI).exp()).abs() < 1e-9);
    }

    #[test]
    fn biorthogonal_systems_reproduce() {
        let g = grid(16, 6.0);
        let f = test_fn(&g);
        for (a, b) in [(1.0, 1.0), (0.5, 1.0), (0.25, 0.5)] {
            let sys = GaborSystem::new(chi(&g), chi(&g), a, b).unwrap();
            let l = max_frequency_index(&sys).min(3);
            assert!(wexler_raz_check(&sys, l, 3, WEXLER_RAZ_TOL_EXACT).unwrap().is_biorthogonal);
            let s = walnut_apply(&f, &sys).unwrap();
            assert!((&s - &f).max_abs() <= 1e-8 * f.max_abs());
        }
    }
}
