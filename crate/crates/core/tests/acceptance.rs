//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use gabor_amalgam::amalgam::{amalgam_norm, Exponent, ExponentPair};
use gabor_amalgam::experiments::{
    convergence_sweep, counterexample_run, dyadic_pairs, SweepSchedule, TREND_RATIO_LIMIT,
};
use gabor_amalgam::gabor::{apply_frame_direct, GaborSystem};
use gabor_amalgam::grid::{Grid, GridFunction, GridSpec};
use gabor_amalgam::janssen::{
    covering_n, janssen_apply, janssen_coefficients, max_frequency_index, wexler_raz_check,
};
use gabor_amalgam::signal::{random_signal, sample_signal, SignalSpec};
use gabor_amalgam::walnut::{
    apply_r, apply_t, correlation_fn, operator_norm_upper_bound, sum_translates, tail_sum, walnut_apply,
};
use gabor_amalgam::window::{sample_window, WindowSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn pq(p: f64, q: f64) -> ExponentPair {
    ExponentPair::from_f64(p, q).unwrap()
}

fn rel_l2(x: &GridFunction, y: &GridFunction, f: &GridFunction) -> f64 {
    (x - y).norm_l2() / f.norm_l2()
}

/// A window pair and lattice drawn for the oracle suite.
struct Instance {
    label: String,
    sys: GaborSystem,
    gaussian_pair: bool,
    f: GridFunction,
}

fn draw_window(rng: &mut ChaCha8Rng) -> WindowSpec {
    match rng.gen_range(0..3) {
        0 => WindowSpec::IndicatorCube { side: 1.0 },
        1 => WindowSpec::Bspline { order: rng.gen_range(2..=3) },
        _ => WindowSpec::Gaussian { sigma: 1.0, radius: 4.0 },
    }
}

fn oracle_grid() -> Grid {
    Grid::new(1, 1.0 / 64.0, 12.0).unwrap()
}

/// Ten systems; the first two are forced to be gaussian pairs so the Janssen check always runs.
fn oracle_suite() -> Vec<Instance> {
    let grid = oracle_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let params = [0.5, 0.25, 0.125];
    (0..10)
        .map(|i| {
            let (gs, ws) = if i < 2 {
                let w = WindowSpec::Gaussian { sigma: 1.0, radius: 4.0 };
                (w, w)
            } else {
                (draw_window(&mut rng), draw_window(&mut rng))
            };
            let a = params[rng.gen_range(0..3)];
            let b = params[rng.gen_range(0..3)];
            let g = sample_window(&gs, &grid).unwrap();
            let gamma = sample_window(&ws, &grid).unwrap();
            let sys = GaborSystem::new(g, gamma, a, b).unwrap();
            let f = random_signal(&grid, -2.0, 2.0, SEED + i as u64);
            Instance {
                label: format!("{}/{} a={a} b={b}", gs.family_name(), ws.family_name()),
                gaussian_pair: matches!(gs, WindowSpec::Gaussian { .. }) && matches!(ws, WindowSpec::Gaussian { .. }),
                sys,
                f,
            }
        })
        .collect()
}

fn criterion_1(suite: &[Instance]) -> Outcome {
    let mut worst_walnut = 0.0f64;
    let mut worst_janssen = 0.0f64;
    let mut janssen_runs = Vec::new();
    for inst in suite {
        let d = apply_frame_direct(&inst.f, &inst.sys).unwrap();
        let w = walnut_apply(&inst.f, &inst.sys).unwrap();
        worst_walnut = worst_walnut.max(rel_l2(&d, &w, &inst.f));
        if inst.gaussian_pair {
            let l = max_frequency_index(&inst.sys).min(8);
            let n = covering_n(&inst.sys);
            let lat = janssen_coefficients(&inst.sys, l, n).unwrap();
            let j = janssen_apply(&inst.f, &lat).unwrap();
            let e = rel_l2(&j, &w, &inst.f);
            worst_janssen = worst_janssen.max(e);
            janssen_runs.push(format!("{} L={l} N={n}", inst.label));
        }
    }
    outcome(
        worst_walnut <= 1e-10 && worst_janssen <= 1e-6 && !janssen_runs.is_empty(),
        format!(
            "10 systems, max |direct-walnut|/|f| = {worst_walnut:.2e}; {} gaussian pairs ({}), max |janssen-walnut|/|f| = {worst_janssen:.2e}",
            janssen_runs.len(),
            janssen_runs.join("; ")
        ),
    )
}

fn criterion_2() -> Outcome {
    let grid = Grid::new(1, 1.0 / 16.0, 8.0).unwrap();
    let chi = sample_window(&WindowSpec::IndicatorCube { side: 1.0 }, &grid).unwrap();
    let fs = [
        sample_signal(&SignalSpec::Hat { left: -1.0, right: 2.0 }, &grid).unwrap(),
        random_signal(&grid, -2.0, 3.0, SEED),
    ];
    let pqs = [pq(1.0, 1.0), pq(2.0, 2.0), pq(1.0, 2.0), pq(2.0, f64::INFINITY)];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in [2.0, 4.0, 8.0] {
        for b in [1.0, 0.5, 0.25] {
            let sys = GaborSystem::new(chi.clone(), chi.clone(), 1.0 / m, b).unwrap();
            for f in &fs {
                let diff = &apply_frame_direct(f, &sys).unwrap() - f;
                for &e in &pqs {
                    worst = worst.max(amalgam_norm(&diff, e) / amalgam_norm(f, e));
                    cases += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-12, format!("{cases} cases, max |Sf-f|/|f| = {worst:.2e}"))
}

fn sweep_schedule(p: f64, q: f64) -> SweepSchedule {
    let e = pq(p, q);
    SweepSchedule {
        grid: GridSpec { dim: 1, h: 1.0 / 64.0, half_extent: 48.0 },
        g: WindowSpec::Bspline { order: 2 },
        gamma: None,
        f: SignalSpec::Gaussian { center: 0.0, sigma: 1.0, radius: 4.0 },
        p: e.p,
        q: e.q,
        pairs: dyadic_pairs(1..=5),
        dual_tests: Vec::new(),
    }
}

fn criterion_3() -> (Outcome, Vec<f64>) {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut values = Vec::new();
    for (p, q) in [(1.0, 2.0), (2.0, 2.0), (2.0, f64::INFINITY)] {
        let r = convergence_sweep(&sweep_schedule(p, q)).unwrap();
        ok &= r.strictly_decreasing && r.trend_ratio < TREND_RATIO_LIMIT;
        values.extend(r.records.iter().map(|x| x.err_f));
        parts.push(format!(
            "{}: ratio {:.3e}{}",
            r.exponents,
            r.trend_ratio,
            if r.strictly_decreasing { "" } else { " (not monotone)" }
        ));
    }
    (outcome(ok, format!("bspline(2), a=b=2^-j j=1..5; {}", parts.join(", "))), values)
}

fn criterion_4(suite: &[Instance]) -> Outcome {
    let grid = oracle_grid();
    let chi = sample_window(&WindowSpec::IndicatorCube { side: 1.0 }, &grid).unwrap();
    let unit = GaborSystem::new(chi.clone(), chi, 1.0, 1.0).unwrap();
    let constant = operator_norm_upper_bound(&unit, pq(2.0, 2.0));

    let pqs = [pq(1.0, 1.0), pq(2.0, 2.0), pq(1.0, 2.0), pq(2.0, f64::INFINITY), pq(f64::INFINITY, 1.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let mut worst = 0.0f64;
    let mut trials = 0;
    let systems = suite.iter().map(|i| &i.sys).chain(std::iter::once(&unit));
    for sys in systems {
        let bound = operator_norm_upper_bound(sys, pq(2.0, 2.0));
        for _ in 0..100 {
            let f = random_signal(&grid, -3.0, 3.0, rng.gen());
            let e = pqs[rng.gen_range(0..pqs.len())];
            let ratio = amalgam_norm(&walnut_apply(&f, sys).unwrap(), e) / amalgam_norm(&f, e);
            worst = worst.max(ratio / bound);
            trials += 1;
        }
    }
    outcome(
        constant == 8.0 && worst <= 1.0,
        format!("constant at a=b=1 = {constant}; {trials} random f, max ratio/bound = {worst:.3}"),
    )
}

fn criterion_5() -> Outcome {
    let grid = Grid::new(1, 1.0 / 512.0, 8.0).unwrap();
    let windows = [
        WindowSpec::IndicatorCube { side: 1.0 },
        WindowSpec::IndicatorCube { side: 2.5 },
        WindowSpec::Bspline { order: 1 },
        WindowSpec::Bspline { order: 2 },
        WindowSpec::Bspline { order: 3 },
        WindowSpec::Bspline { order: 4 },
        WindowSpec::Gaussian { sigma: 1.0, radius: 4.0 },
        WindowSpec::Gaussian { sigma: 0.25, radius: 1.0 },
        WindowSpec::FatCantor { depth: 1 },
        WindowSpec::FatCantor { depth: 2 },
        WindowSpec::FatCantor { depth: 3 },
    ];
    let mut violations = 0;
    let mut samples = 0;
    let mut worst = 0.0f64;
    for w in &windows {
        let g = sample_window(w, &grid).unwrap();
        for a in [1.0, 0.5, 0.25] {
            let s = sum_translates(&g, a).unwrap();
            violations += s.values.iter().filter(|&&v| v > s.bound).count();
            samples += s.values.len();
            worst = worst.max(s.max / s.bound);
        }
    }
    outcome(
        violations == 0,
        format!("{} windows x 3 values of a, {samples} cell samples, {violations} violations, max sum/bound = {worst:.3}", windows.len()),
    )
}

fn criterion_6(suite: &[Instance]) -> Outcome {
    let mut within = true;
    let mut worst = 0.0f64;
    for inst in suite {
        let t = tail_sum(&inst.sys);
        within &= t.within_bound;
        worst = worst.max(t.full_sum / t.bound);
    }
    let grid = Grid::new(1, 1.0 / 64.0, 16.0).unwrap();
    let mut ratios = Vec::new();
    let mut trend_ok = true;
    for w in [WindowSpec::Bspline { order: 3 }, WindowSpec::Gaussian { sigma: 1.0, radius: 4.0 }] {
        let g = sample_window(&w, &grid).unwrap();
        let tails: Vec<f64> = dyadic_pairs(1..=5)
            .iter()
            .map(|&[a, b]| {
                let t = tail_sum(&GaborSystem::new(g.clone(), g.clone(), a, b).unwrap());
                within &= t.within_bound;
                worst = worst.max(t.full_sum / t.bound);
                t.tail
            })
            .collect();
        let r = gabor_amalgam::experiments::trend_ratio(&tails);
        trend_ok &= r < TREND_RATIO_LIMIT;
        ratios.push(format!("{} {r:.2e}", w.family_name()));
    }
    outcome(
        within && trend_ok,
        format!("max full sum/bound = {worst:.3}; tail last/first: {}", ratios.join(", ")),
    )
}

fn criterion_7() -> Outcome {
    let grid = Grid::new(1, 1.0 / 128.0, 8.0).unwrap();
    let g = sample_window(&WindowSpec::Gaussian { sigma: 1.0, radius: 4.0 }, &grid).unwrap();
    let sys = GaborSystem::new(g.clone(), g, 0.5, 0.5).unwrap();
    let n_max = covering_n(&sys);
    let lat = janssen_coefficients(&sys, 16, n_max).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in lat.n_range().iter() {
        let cell = correlation_fn(&sys, &n);
        for l in lat.l_range().iter() {
            let c = lat.get(&l, &n).unwrap() / sys.a();
            worst = worst.max((cell.fourier_coefficient(&l) - c).norm());
            count += 1;
        }
    }
    outcome(worst <= 1e-8, format!("{count} coefficients (|l| <= 16, |n| <= {n_max}), max deviation {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let grid = Grid::new(1, 1.0 / 16.0, 6.0).unwrap();
    let chi = sample_window(&WindowSpec::IndicatorCube { side: 1.0 }, &grid).unwrap();

    let unit = GaborSystem::new(chi.clone(), chi.clone(), 1.0, 1.0).unwrap();
    let pass = wexler_raz_check(&unit, 7, 4, 1e-10).unwrap();
    let lat = janssen_coefficients(&unit, 7, 4).unwrap();
    let f = random_signal(&grid, -2.0, 3.0, SEED ^ 8);
    let reproduced = janssen_apply(&f, &lat).unwrap().max_abs_diff(&f).unwrap();

    let half = GaborSystem::new(chi.clone(), chi.clone(), 0.5, 0.5).unwrap();
    let fail = wexler_raz_check(&half, 3, 4, 1e-10).unwrap();

    // shifts n/b = n/2 overlap; reported for comparison with the a=b=1/2 case
    let half_shift = GaborSystem::new(chi.clone(), chi, 0.5, 2.0).unwrap();
    let overlap = wexler_raz_check(&half_shift, 3, 4, 1e-10).unwrap();

    let ok = pass.is_biorthogonal
        && pass.max_offdiag <= 1e-10
        && !fail.is_biorthogonal
        && fail.max_offdiag >= 0.1
        && reproduced <= 1e-10;
    outcome(
        ok,
        format!(
            "a=b=1: biorthogonal={} max_offdiag={:.1e}, janssen reproduces f to {:.1e}; a=b=1/2: biorthogonal={} max_offdiag={:.1e} (required >= 0.1); a=1/2 b=2: max_offdiag={:.3}",
            pass.is_biorthogonal, pass.max_offdiag, reproduced, fail.is_biorthogonal, fail.max_offdiag, overlap.max_offdiag
        ),
    )
}

fn criterion_9() -> (Outcome, Vec<f64>) {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut values = Vec::new();
    for q in [Exponent::Infinity, Exponent::Finite(1.0), Exponent::Finite(2.0)] {
        let r = counterexample_run(&[1, 2, 3], q).unwrap();
        ok &= r.passed;
        values.extend(r.witnesses.iter().map(|w| w.norm));
        let ws: Vec<String> =
            r.witnesses.iter().map(|w| format!("k={} a={} norm={:.3}", w.depth, w.a, w.norm)).collect();
        parts.push(format!(
            "q={q}: {}; contrast {:.1e}, separation {}",
            ws.join(" "),
            r.contrast_final,
            if r.separation.is_infinite() { "inf".to_string() } else { format!("{:.1}", r.separation) }
        ));
    }
    (outcome(ok, parts.join(" | ")), values)
}

fn criterion_10(suite: &[Instance]) -> Outcome {
    let pqs = [pq(1.0, 1.0), pq(2.0, 2.0), pq(1.0, 2.0), pq(2.0, f64::INFINITY), pq(f64::INFINITY, 1.0)];
    let mut worst_split = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for inst in suite {
        let f = &inst.f;
        let s = walnut_apply(f, &inst.sys).unwrap();
        let t = apply_t(f, &inst.sys).unwrap();
        let r = apply_r(f, &inst.sys).unwrap();
        let split = (&(&s - f) - &(&t + &r)).max_abs() / f.max_abs().max(1.0);
        worst_split = worst_split.max(split);
        let coef = tail_sum(&inst.sys).tail / inst.sys.normalization().norm();
        for &e in &pqs {
            let rn = amalgam_norm(&r, e);
            let bound = coef * amalgam_norm(f, e);
            if rn > 0.0 {
                worst_ratio = worst_ratio.max(rn / bound);
            }
        }
    }
    outcome(
        worst_split <= 1e-12 && worst_ratio <= 1.0 + 1e-12,
        format!("{} systems, max |Sf-f-Tf-Rf| = {worst_split:.1e}, max |Rf|/bound = {worst_ratio:.3}", suite.len()),
    )
}

/// Numbers produced by the heavier suites, for the thread-count comparison.
fn fingerprint() -> Vec<f64> {
    let suite = oracle_suite();
    let mut v = Vec::new();
    for inst in suite.iter().take(4) {
        let d = apply_frame_direct(&inst.f, &inst.sys).unwrap();
        let w = walnut_apply(&inst.f, &inst.sys).unwrap();
        v.extend(d.values().iter().chain(w.values()).flat_map(|c| [c.re, c.im]));
    }
    v.extend(criterion_3().1);
    v.extend(criterion_9().1);
    v
}

fn criterion_11() -> Outcome {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(fingerprint)
    };
    let one = run(1);
    let eight = run(8);
    let worst = one.iter().zip(&eight).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(
        one.len() == eight.len() && worst <= 1e-12,
        format!("{} values compared between 1 and 8 threads, max difference {worst:.1e}", one.len()),
    )
}

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let suite = oracle_suite();
    let criteria: Vec<Criterion> = vec![
        (1, "oracle equivalence", Box::new(|| criterion_1(&suite))),
        (2, "exact-identity regime", Box::new(criterion_2)),
        (3, "strong convergence trend", Box::new(|| criterion_3().0)),
        (4, "operator norm constant", Box::new(|| criterion_4(&suite))),
        (5, "sum of translates bound", Box::new(criterion_5)),
        (6, "correlation sum bound and tail trend", Box::new(|| criterion_6(&suite))),
        (7, "Fourier coefficients of correlation functions", Box::new(criterion_7)),
        (8, "Wexler-Raz test", Box::new(criterion_8)),
        (9, "counterexample for p = inf", Box::new(|| criterion_9().0)),
        (10, "T + R decomposition", Box::new(|| criterion_10(&suite))),
        (11, "determinism across thread counts", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (id, name, check) in &criteria {
        let start = Instant::now();
        let o = check();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {id:>2} {} {name} ({secs:.1}s): {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
