//! Command-line front end: parameters in, CSV/JSON and human summaries out.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use hiernm::model::{PhysParams, SpectralWidth, TimeGrid};
use hiernm::nm::{choose_horizon, nm_for_propagator, NMResult};
use hiernm::output::{fmt_g17, fmt_width, phase_csv, series_csv, threshold_csv};
use hiernm::phase::{lin_spaced, log_spaced, sweep, SweepSpec, DEFAULT_TOL};
use hiernm::propagator::Propagator;
use hiernm::qubit::DensityMatrix2;

#[derive(Parser)]
#[command(
    name = "hiernm",
    version,
    about = "Qubit in a cavity-reservoir hierarchy: exact propagator, trace-distance \
             non-Markovianity, and Markovian/non-Markovian phase maps",
    after_help = "All rates are in units of gamma, times in 1/gamma. `--lambda inf` \
                  selects the memoryless reservoir."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the propagator G(t).
    Gfunc(GfuncArgs),
    /// Tabulate the trace distance D(t) for a pair of initial states.
    TraceDistance(TraceDistanceArgs),
    /// Non-Markovianity of one parameter point.
    Nm(NmArgs),
    /// Locate the Markovian/non-Markovian threshold coupling by bisection.
    Threshold(ThresholdArgs),
    /// Sweep the (kappa, lambda) plane: NM grid plus threshold curve.
    Sweep(SweepArgs),
    /// Cross-check the analytic propagator against the amplitude-equation
    /// oracle.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Qubit-cavity coupling (units of gamma).
    #[arg(long)]
    kappa: f64,
    /// Reservoir spectral width (units of gamma), or `inf`.
    #[arg(long, value_parser = SpectralWidth::parse)]
    lambda: SpectralWidth,
    /// Reservoir decay scale; the unit of rates and inverse times.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; data goes to stdout when omitted (where applicable).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct GfuncArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// End of the tabulation window (units of 1/gamma).
    #[arg(long, default_value_t = 50.0)]
    tmax: f64,
    /// Tabulation step.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TraceDistanceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 50.0)]
    tmax: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Initial pair as `ee1,re1,im1,ee2,re2,im2` (populations and coherence
    /// parts); defaults to the optimal pair |+><+|, |-><-|.
    #[arg(long)]
    pair: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct NmArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Fixed horizon; defaults to the envelope policy (evolve until the
    /// decay envelope of |G| is below 1e-6 or t = 200/gamma).
    #[arg(long)]
    tmax: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Reservoir spectral width (units of gamma), or `inf`.
    #[arg(long, value_parser = SpectralWidth::parse)]
    lambda: SpectralWidth,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Coupling grid `a:b:n` (n linearly spaced points); defaults to
    /// 0.05:1.0:20.
    #[arg(long)]
    kappa_range: Option<String>,
    /// Width grid `a:b:n`; defaults to 25 log-spaced points on 0.05:100
    /// plus the `inf` column.
    #[arg(long)]
    lambda_range: Option<String>,
    /// Space the lambda grid logarithmically.
    #[arg(long)]
    log: bool,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Parallelism bound for the sweep (default: all cores).
    #[arg(long, env = "HIERNM_JOBS")]
    jobs: Option<usize>,
    /// Output file for the NM grid; the threshold curve goes next to it as
    /// `<stem>_threshold.csv`.
    #[arg(long, default_value = "phase.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 50.0)]
    tmax: f64,
    /// Oracle step; defaults to 1e-3/gamma (1e-4/gamma for lambda >
    /// 100 gamma).
    #[arg(long)]
    dt: Option<f64>,
}

enum RunError {
    /// Bad argument values: exit code 2.
    Usage(String),
    /// Computation or I/O failure: exit code 1.
    Failure(hiernm::Error),
}

impl From<hiernm::Error> for RunError {
    fn from(e: hiernm::Error) -> Self {
        RunError::Failure(e)
    }
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (`hiernm gfunc | head`),
    // like any data-emitting Unix tool, instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Failure(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Gfunc(args) => run_gfunc(args),
        Command::TraceDistance(args) => run_trace_distance(args),
        Command::Nm(args) => run_nm(args),
        Command::Threshold(args) => run_threshold(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn build_params(model: &ModelArgs) -> Result<PhysParams, RunError> {
    PhysParams::new(model.kappa, model.lambda, model.gamma)
        .map_err(|e| RunError::Usage(e.to_string()))
}

fn build_grid(tmax: f64, dt: f64) -> Result<TimeGrid, RunError> {
    TimeGrid::new(tmax, dt).map_err(|e| RunError::Usage(e.to_string()))
}

/// Write to the file when a path was given, otherwise to stdout. Returns
/// true when a file was written (callers then print a summary).
fn emit(out: &Option<PathBuf>, data: &str) -> Result<bool, RunError> {
    match out {
        Some(path) => {
            std::fs::write(path, data).map_err(|e| RunError::Failure(e.into()))?;
            Ok(true)
        }
        None => {
            print!("{data}");
            Ok(false)
        }
    }
}

fn series_json(col_a: &str, col_b: &str, rows: &[(f64, f64)]) -> String {
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    serde_json::json!({ col_a: a, col_b: b }).to_string()
}

fn run_gfunc(args: GfuncArgs) -> Result<(), RunError> {
    let p = build_params(&args.model)?;
    let grid = build_grid(args.tmax, args.dt)?;
    let prop = Propagator::for_params(&p)?;
    let mut rows = Vec::with_capacity(grid.n() + 1);
    for t in grid.times() {
        rows.push((t, prop.eval(t)?));
    }
    let data = match args.output.format {
        Format::Csv => series_csv("t", "G", &rows),
        Format::Json => series_json("t", "G", &rows),
    };
    if emit(&args.output.out, &data)? {
        let last = rows.last().unwrap();
        let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        println!("samples = {}", rows.len());
        println!("G(tmax) = {}", fmt_g17(last.1));
        println!("min G = {}", fmt_g17(min));
    }
    Ok(())
}

fn parse_pair(spec: &str) -> Result<(DensityMatrix2, DensityMatrix2), RunError> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| RunError::Usage(format!("cannot parse --pair `{spec}`")))?;
    if parts.len() != 6 {
        return Err(RunError::Usage(
            "--pair needs 6 values: ee1,re1,im1,ee2,re2,im2".into(),
        ));
    }
    let rho1 = DensityMatrix2::new(parts[0], Complex64::new(parts[1], parts[2]))
        .map_err(|e| RunError::Usage(format!("first state: {e}")))?;
    let rho2 = DensityMatrix2::new(parts[3], Complex64::new(parts[4], parts[5]))
        .map_err(|e| RunError::Usage(format!("second state: {e}")))?;
    Ok((rho1, rho2))
}

fn run_trace_distance(args: TraceDistanceArgs) -> Result<(), RunError> {
    let p = build_params(&args.model)?;
    let grid = build_grid(args.tmax, args.dt)?;
    let (rho1, rho2) = match &args.pair {
        Some(spec) => parse_pair(spec)?,
        None => (DensityMatrix2::plus(), DensityMatrix2::minus()),
    };
    let delta_a = rho1.ee() - rho2.ee();
    let delta_b = rho1.eg() - rho2.eg();
    let prop = Propagator::for_params(&p)?;
    let mut rows = Vec::with_capacity(grid.n() + 1);
    for t in grid.times() {
        let g = Complex64::new(prop.eval(t)?, 0.0);
        rows.push((t, hiernm::qubit::trace_distance_model(g, delta_a, delta_b)));
    }
    let data = match args.output.format {
        Format::Csv => series_csv("t", "D", &rows),
        Format::Json => series_json("t", "D", &rows),
    };
    if emit(&args.output.out, &data)? {
        let last = rows.last().unwrap();
        println!("samples = {}", rows.len());
        println!("D(tmax) = {}", fmt_g17(last.1));
    }
    Ok(())
}

fn print_nm_summary(r: &NMResult) {
    println!("nm = {}", fmt_g17(r.nm_value));
    println!(
        "classification = {}",
        if r.markovian {
            "markovian"
        } else {
            "non-markovian"
        }
    );
    println!("horizon = {}", fmt_g17(r.horizon));
    println!("truncation_bound = {}", fmt_g17(r.truncation_bound));
    println!("rises = {}", r.rises.len());
    for (i, rise) in r.rises.iter().enumerate() {
        println!(
            "rise {i}: t in [{}, {}], gain = {}",
            fmt_g17(rise.t_start),
            fmt_g17(rise.t_end),
            fmt_g17(rise.gain)
        );
    }
    if r.horizon_warning {
        eprintln!(
            "warning: horizon too short (truncation bound {} > 0.01)",
            fmt_g17(r.truncation_bound)
        );
    }
}

fn run_nm(args: NmArgs) -> Result<(), RunError> {
    let p = build_params(&args.model)?;
    if let Some(tmax) = args.tmax {
        if !(tmax.is_finite() && tmax > 0.0) {
            return Err(RunError::Usage(format!("tmax must be > 0, got {tmax}")));
        }
    }
    let prop = Propagator::for_params(&p)?;
    let horizon = args
        .tmax
        .unwrap_or_else(|| choose_horizon(&prop, p.gamma()));
    let result = nm_for_propagator(&prop, p.gamma(), horizon)?;
    print_nm_summary(&result);
    if let Some(path) = &args.output.out {
        let data = match args.output.format {
            Format::Json => serde_json::to_string_pretty(&result).map_err(|e| {
                RunError::Failure(hiernm::Error::Internal {
                    what: e.to_string(),
                })
            })?,
            Format::Csv => {
                let mut text = String::from("t_start,t_end,gain\n");
                for rise in &result.rises {
                    text.push_str(&format!(
                        "{},{},{}\n",
                        fmt_g17(rise.t_start),
                        fmt_g17(rise.t_end),
                        fmt_g17(rise.gain)
                    ));
                }
                text
            }
        };
        std::fs::write(path, data).map_err(|e| RunError::Failure(e.into()))?;
    }
    Ok(())
}

fn run_threshold(args: ThresholdArgs) -> Result<(), RunError> {
    if !(args.gamma.is_finite() && args.gamma > 0.0) {
        return Err(RunError::Usage(format!(
            "gamma must be > 0, got {}",
            args.gamma
        )));
    }
    let tol = DEFAULT_TOL * args.gamma;
    let kappa_t = hiernm::phase::threshold_kappa(args.lambda, args.gamma, None, tol)?;
    println!("kappa_t = {} +- {}", fmt_g17(kappa_t), fmt_g17(tol));
    if let Some(path) = &args.output.out {
        let data = match args.output.format {
            Format::Csv => format!(
                "lambda,kappa_t,tol\n{},{},{}\n",
                fmt_width(args.lambda),
                fmt_g17(kappa_t),
                fmt_g17(tol)
            ),
            Format::Json => serde_json::json!({
                "lambda": args.lambda,
                "kappa_t": kappa_t,
                "tol": tol,
            })
            .to_string(),
        };
        std::fs::write(path, data).map_err(|e| RunError::Failure(e.into()))?;
    }
    Ok(())
}

fn parse_range(spec: &str, what: &str) -> Result<(f64, f64, usize), RunError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(RunError::Usage(format!(
            "{what} must be `a:b:n`, got `{spec}`"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| RunError::Usage(format!("{what}: bad start `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| RunError::Usage(format!("{what}: bad end `{}`", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| RunError::Usage(format!("{what}: bad count `{}`", parts[2])))?;
    if n == 0 || !a.is_finite() || !b.is_finite() || (n > 1 && b <= a) {
        return Err(RunError::Usage(format!("{what}: empty or inverted range")));
    }
    Ok((a, b, n))
}

fn threshold_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "phase".into());
    out.with_file_name(format!("{stem}_threshold.csv"))
}

fn run_sweep(args: SweepArgs) -> Result<(), RunError> {
    if !(args.gamma.is_finite() && args.gamma > 0.0) {
        return Err(RunError::Usage(format!(
            "gamma must be > 0, got {}",
            args.gamma
        )));
    }
    let mut spec = SweepSpec::default_grids(args.gamma);
    spec.jobs = args.jobs;
    if let Some(r) = &args.kappa_range {
        let (a, b, n) = parse_range(r, "--kappa-range")?;
        spec.kappa_grid = lin_spaced(a, b, n);
    }
    if let Some(r) = &args.lambda_range {
        let (a, b, n) = parse_range(r, "--lambda-range")?;
        let values = if args.log {
            if a <= 0.0 {
                return Err(RunError::Usage(
                    "--lambda-range with --log needs a > 0".into(),
                ));
            }
            log_spaced(a, b, n)
        } else {
            lin_spaced(a, b, n)
        };
        spec.lambda_grid = values.into_iter().map(SpectralWidth::Finite).collect();
    }
    let diagram = sweep(&spec)?;

    match args.format {
        Format::Csv => {
            std::fs::write(&args.out, phase_csv(&diagram))
                .map_err(|e| RunError::Failure(e.into()))?;
            let tpath = threshold_path(&args.out);
            std::fs::write(&tpath, threshold_csv(&diagram))
                .map_err(|e| RunError::Failure(e.into()))?;
            println!(
                "wrote {} x {} grid to {}",
                diagram.kappa_axis.len(),
                diagram.lambda_axis.len(),
                args.out.display()
            );
            println!("wrote threshold curve to {}", tpath.display());
        }
        Format::Json => {
            let data = serde_json::to_string_pretty(&diagram).map_err(|e| {
                RunError::Failure(hiernm::Error::Internal {
                    what: e.to_string(),
                })
            })?;
            std::fs::write(&args.out, data).map_err(|e| RunError::Failure(e.into()))?;
            println!(
                "wrote {} x {} grid to {}",
                diagram.kappa_axis.len(),
                diagram.lambda_axis.len(),
                args.out.display()
            );
        }
    }
    println!("diagnostics = {}", diagram.diagnostics.len());
    for d in &diagram.diagnostics {
        eprintln!("diagnostic: {d}");
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), RunError> {
    let p = build_params(&args.model)?;
    let grid = match args.dt {
        Some(dt) => build_grid(args.tmax, dt)?,
        None => hiernm::oracle::default_grid(&p, args.tmax)?,
    };
    let prop = Propagator::for_params(&p)?;
    let amplitudes = hiernm::oracle::integrate(&p, &grid)?;
    let mut max_dev: f64 = 0.0;
    for (i, t) in grid.times().enumerate() {
        let g = prop.eval(t)?;
        max_dev = max_dev.max((amplitudes[i] - Complex64::new(g, 0.0)).norm());
    }
    println!("samples = {}", amplitudes.len());
    println!("dt = {}", fmt_g17(grid.dt()));
    println!("max |G_analytic - A_oracle| = {}", fmt_g17(max_dev));
    if max_dev < 1e-6 {
        println!("verify: OK");
        Ok(())
    } else {
        Err(RunError::Failure(hiernm::Error::Internal {
            what: format!("analytic/oracle deviation {max_dev} exceeds 1e-6"),
        }))
    }
}
