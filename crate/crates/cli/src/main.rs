//! `gabor`: command-line driver for the `gabor-amalgam` library.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 when a
//! numerical contract (bound, trend, identity) is violated. Errors are
//! reported on stderr as a single JSON object.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use gabor_amalgam::amalgam::{amalgam_norm, Exponent, ExponentPair};
use gabor_amalgam::experiments::{convergence_sweep, counterexample_run, SweepReport, SweepSchedule};
use gabor_amalgam::export::{format_float, write_grid_function_csv, write_records, write_table};
use gabor_amalgam::gabor::{apply_frame_direct, gabor_coefficients, GaborSystem};
use gabor_amalgam::grid::{Grid, GridFunction, GridSpec};
use gabor_amalgam::janssen::{
    covering_n, janssen_apply, janssen_coefficients, max_frequency_index, wexler_raz_check, WEXLER_RAZ_TOL_EXACT,
};
use gabor_amalgam::signal::{random_signal, sample_signal, SignalSpec};
use gabor_amalgam::walnut::{g_a_deviation, operator_norm_upper_bound, tail_sum, walnut_apply};
use gabor_amalgam::window::{sample_window, WindowSpec};
use gabor_amalgam::{parse_versioned, GaborError, SystemSpec};

#[derive(Debug, Parser)]
#[command(name = "gabor", version, about = "Gabor frame operators on discretized Wiener amalgam spaces")]
struct Cli {
    /// Config file for the command (JSON with "schema": "v1").
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path; defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Size of the worker pool.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Seed for randomized inputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Direct,
    Walnut,
    Janssen,
}

#[derive(Debug, clap::Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Grid spacing; must be 1/m.
    #[arg(long, default_value_t = 1.0 / 64.0)]
    h: f64,
    #[arg(long, default_value_t = 8.0)]
    half_extent: f64,
}

#[derive(Debug, clap::Args)]
struct SystemArgs {
    /// Gabor system file (grid, g, optional gamma, a, b).
    #[arg(long)]
    system: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct SignalArgs {
    /// Test function file; without it a random signal on [-2, 2) is drawn from `--seed`.
    #[arg(long)]
    signal: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// W(L^p, l^q) norm of a sampled window.
    Norm {
        #[arg(long)]
        window: Option<PathBuf>,
        #[arg(long)]
        p: Exponent,
        #[arg(long)]
        q: Exponent,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Gabor coefficients <f, M_{mb} T_{na} g> as CSV.
    Stft {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        signal: SignalArgs,
    },
    /// Applies the frame operator and writes the result as CSV.
    Apply {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        signal: SignalArgs,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
        /// Largest |l| for the Janssen method; defaults to one full period.
        #[arg(long = "L")]
        l_max: Option<i64>,
        /// Largest |n| for the Janssen method; defaults to all nonzero terms.
        #[arg(long = "N")]
        n_max: Option<i64>,
    },
    /// Norm constants of a system as JSON.
    Bounds {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value = "2")]
        p: Exponent,
        #[arg(long, default_value = "2")]
        q: Exponent,
    },
    /// Convergence sweep over a lattice schedule.
    Sweep,
    /// Tests the Wexler-Raz biorthogonality relations.
    WexlerRaz {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long = "L")]
        l_max: i64,
        #[arg(long = "N")]
        n_max: i64,
        #[arg(long, default_value_t = WEXLER_RAZ_TOL_EXACT)]
        tol: f64,
    },
    /// Fat Cantor set counterexample for p = infinity.
    Counterexample {
        #[arg(long, value_delimiter = ',', required = true)]
        depths: Vec<u32>,
        #[arg(long, default_value = "inf")]
        q: Exponent,
    },
    /// Runs a small set of exact identities.
    Selftest,
}

#[derive(Debug)]
enum CliError {
    Invalid { kind: &'static str, message: String },
    Contract(String),
    /// The reader went away, as with `gabor stft ... | head`.
    BrokenPipe,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> CliError {
        CliError::Invalid { kind: "invalid_arguments", message: message.into() }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::BrokenPipe => 0,
            CliError::Invalid { .. } => 1,
            CliError::Contract(_) => 2,
        }
    }

    fn report(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Invalid { kind, message } => (*kind, message.as_str()),
            CliError::Contract(message) => ("contract_violation", message.as_str()),
            CliError::BrokenPipe => ("broken_pipe", ""),
        };
        json!({ "error": kind, "message": message, "exit_code": self.exit_code() })
    }
}

impl From<GaborError> for CliError {
    fn from(e: GaborError) -> Self {
        CliError::Invalid { kind: e.kind(), message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return CliError::BrokenPipe;
        }
        CliError::Invalid { kind: "io", message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let err = CliError::Invalid { kind: "usage", message: e.kind().to_string() };
            eprintln!("{}", err.report());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) | Err(CliError::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }
    let ctx = Context { config: cli.config, out: cli.out, seed: cli.seed };
    match cli.command {
        Command::Norm { window, p, q, grid } => ctx.norm(window, ExponentPair::new(p, q), &grid),
        Command::Stft { system, signal } => ctx.stft(&system, &signal),
        Command::Apply { system, signal, method, l_max, n_max } => ctx.apply(&system, &signal, method, l_max, n_max),
        Command::Bounds { system, p, q } => ctx.bounds(&system, ExponentPair::new(p, q)),
        Command::Sweep => ctx.sweep(),
        Command::WexlerRaz { system, l_max, n_max, tol } => ctx.wexler_raz(&system, l_max, n_max, tol),
        Command::Counterexample { depths, q } => ctx.counterexample(&depths, q),
        Command::Selftest => ctx.selftest(),
    }
}

struct Context {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

impl Context {
    /// The command-specific path if given, else `--config`.
    fn input_path<'a>(&'a self, specific: Option<&'a PathBuf>, flag: &str) -> CliResult<&'a Path> {
        specific
            .or(self.config.as_ref())
            .map(PathBuf::as_path)
            .ok_or_else(|| CliError::invalid(format!("missing --{flag} (or --config)")))
    }

    fn output(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(fs::File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn write_json(&self, value: &impl Serialize) -> CliResult<()> {
        let mut out = self.output()?;
        serde_json::to_writer(&mut out, value).map_err(io::Error::from)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    fn system(&self, args: &SystemArgs) -> CliResult<GaborSystem> {
        let spec: SystemSpec = read_config(self.input_path(args.system.as_ref(), "system")?)?;
        Ok(spec.build()?)
    }

    fn signal(&self, args: &SignalArgs, grid: &Grid) -> CliResult<GridFunction> {
        match (&args.signal, self.seed) {
            (Some(path), _) => {
                let spec: SignalSpec = read_config(path)?;
                Ok(sample_signal(&spec, grid)?)
            }
            (None, Some(seed)) => Ok(random_signal(grid, -2.0, 2.0, seed)),
            (None, None) => Err(CliError::invalid("a random test signal needs --seed (or pass --signal)")),
        }
    }

    fn norm(&self, window: Option<PathBuf>, pq: ExponentPair, grid: &GridArgs) -> CliResult<()> {
        let spec: WindowSpec = read_config(self.input_path(window.as_ref(), "window")?)?;
        let grid = Grid::from_spec(&GridSpec { dim: grid.dim, h: grid.h, half_extent: grid.half_extent })?;
        let w = sample_window(&spec, &grid)?;
        self.write_json(&json!({ "norm": amalgam_norm(&w, pq) }))
    }

    fn stft(&self, system: &SystemArgs, signal: &SignalArgs) -> CliResult<()> {
        let sys = self.system(system)?;
        let f = self.signal(signal, sys.grid())?;
        let coeffs = gabor_coefficients(&f, &sys)?;
        let d = sys.dim();
        let header = if d == 1 {
            vec!["n".to_string(), "m".to_string()]
        } else {
            (1..=d).map(|i| format!("n_{i}")).chain((1..=d).map(|i| format!("m_{i}"))).collect()
        };
        let header: Vec<&str> = header.iter().map(String::as_str).chain(["re", "im"]).collect();
        let rows: Vec<Vec<String>> = coeffs
            .iter()
            .map(|(n, m, c)| {
                n[..d]
                    .iter()
                    .chain(&m[..d])
                    .map(|k| k.to_string())
                    .chain([format_float(c.re), format_float(c.im)])
                    .collect()
            })
            .collect();
        let mut out = self.output()?;
        write_records(&header, &rows, &mut out)?;
        out.flush()?;
        Ok(())
    }

    fn apply(
        &self,
        system: &SystemArgs,
        signal: &SignalArgs,
        method: Method,
        l_max: Option<i64>,
        n_max: Option<i64>,
    ) -> CliResult<()> {
        let sys = self.system(system)?;
        let f = self.signal(signal, sys.grid())?;
        let s = match method {
            Method::Direct => apply_frame_direct(&f, &sys)?,
            Method::Walnut => walnut_apply(&f, &sys)?,
            Method::Janssen => {
                let l = l_max.unwrap_or_else(|| max_frequency_index(&sys));
                let n = n_max.unwrap_or_else(|| covering_n(&sys));
                janssen_apply(&f, &janssen_coefficients(&sys, l, n)?)?
            }
        };
        let mut out = self.output()?;
        write_grid_function_csv(&s, &mut out)?;
        out.flush()?;
        Ok(())
    }

    fn bounds(&self, system: &SystemArgs, pq: ExponentPair) -> CliResult<()> {
        let sys = self.system(system)?;
        let tail = tail_sum(&sys);
        self.write_json(&json!({
            "a": sys.a(),
            "b": sys.b(),
            "norm_bound": operator_norm_upper_bound(&sys, pq),
            "tail_sum": tail.tail,
            "g_a_dev": g_a_deviation(&sys)?,
        }))?;
        if !tail.within_bound {
            return Err(CliError::Contract(format!(
                "correlation sum {} exceeds its bound {}",
                tail.full_sum, tail.bound
            )));
        }
        Ok(())
    }

    fn sweep(&self) -> CliResult<()> {
        let schedule: SweepSchedule = read_config(self.input_path(None, "config")?)?;
        let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let clock = Instant::now();
        let report = convergence_sweep(&schedule)?;
        let elapsed = clock.elapsed().as_secs_f64();

        let mut out = self.output()?;
        write_table(&SweepReport::CSV_HEADER, &report.csv_rows(), &mut out)?;
        out.flush()?;
        drop(out);

        let summary = json!({ "passed": report.passed, "trend_ratio": report.trend_ratio });
        if let Some(path) = &self.out {
            let meta = json!({
                "started_unix": started,
                "elapsed_seconds": elapsed,
                "wall_time": report.records.iter().map(|r| r.wall_time).collect::<Vec<_>>(),
            });
            fs::write(sidecar(path, "meta.json"), format!("{meta}\n"))?;
            fs::write(sidecar(path, "summary.json"), format!("{summary}\n"))?;
            println!("{summary}");
        }
        if !report.passed {
            return Err(CliError::Contract(format!(
                "sweep failed: trend ratio {}, strictly decreasing {}, bounds hold {}",
                report.trend_ratio, report.strictly_decreasing, report.bounds_hold
            )));
        }
        Ok(())
    }

    fn wexler_raz(&self, system: &SystemArgs, l_max: i64, n_max: i64, tol: f64) -> CliResult<()> {
        if tol.is_nan() || tol < 0.0 {
            return Err(CliError::invalid("--tol must be a nonnegative number"));
        }
        let sys = self.system(system)?;
        let wr = wexler_raz_check(&sys, l_max, n_max, tol)?;
        self.write_json(&json!({
            "is_biorthogonal": wr.is_biorthogonal,
            "max_offdiag": wr.max_offdiag,
            "diag": wr.diag,
        }))
    }

    fn counterexample(&self, depths: &[u32], q: Exponent) -> CliResult<()> {
        let report = counterexample_run(depths, q)?;
        let header = ["depth", "spacing", "a", "norm", "threshold", "passed"];
        let rows: Vec<Vec<String>> = report
            .witnesses
            .iter()
            .map(|w| {
                let mut row = vec![w.depth.to_string()];
                row.extend([w.spacing, w.a, w.norm, w.threshold].map(format_float));
                row.push(w.passed.to_string());
                row
            })
            .collect();
        let mut out = self.output()?;
        write_records(&header, &rows, &mut out)?;
        out.flush()?;
        drop(out);
        if self.out.is_some() {
            println!(
                "{}",
                json!({
                    "passed": report.passed,
                    "contrast_final": report.contrast_final,
                    "separation": report.separation,
                })
            );
        }
        if !report.passed {
            return Err(CliError::Contract(format!(
                "counterexample not confirmed: contrast {}, separation {}",
                report.contrast_final, report.separation
            )));
        }
        Ok(())
    }

    fn selftest(&self) -> CliResult<()> {
        let checks = selftest_checks()?;
        let passed = checks.iter().all(|c| c.passed);
        self.write_json(&json!({ "passed": passed, "checks": checks }))?;
        if !passed {
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            return Err(CliError::Contract(format!("selftest failed: {}", failed.join(", "))));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    value: f64,
}

fn selftest_checks() -> CliResult<Vec<Check>> {
    let grid = Grid::new(1, 1.0 / 16.0, 6.0)?;
    let chi = sample_window(&WindowSpec::IndicatorCube { side: 1.0 }, &grid)?;
    let sys = GaborSystem::new(chi.clone(), chi, 1.0, 1.0)?;

    // chi_[0,1) on the unit lattice reproduces every f
    let f = random_signal(&grid, -2.0, 2.0, 7);
    let identity = apply_frame_direct(&f, &sys)?.max_abs_diff(&f)?;
    let walnut = walnut_apply(&f, &sys)?.max_abs_diff(&f)?;

    let wr = wexler_raz_check(&sys, 3, 3, WEXLER_RAZ_TOL_EXACT)?;
    let constant = operator_norm_upper_bound(&sys, ExponentPair::new(Exponent::Finite(2.0), Exponent::Finite(2.0)));

    Ok(vec![
        Check { name: "direct_identity", passed: identity <= 1e-12, value: identity },
        Check { name: "walnut_identity", passed: walnut <= 1e-12, value: walnut },
        Check { name: "wexler_raz_indicator", passed: wr.is_biorthogonal, value: wr.max_offdiag },
        Check { name: "norm_constant", passed: constant == 8.0, value: constant },
    ])
}

fn read_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Invalid { kind: "io", message: format!("{}: {e}", path.display()) })?;
    Ok(parse_versioned(&text)?)
}

/// `out.csv` -> `out.csv.<suffix>`.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}
