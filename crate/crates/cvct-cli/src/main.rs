//! Command-line front end: runs teleportation scenarios, emits figure data
//! as CSV or JSON, and executes the verification suite.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

mod output;
mod run;
mod scenario;
mod verify;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use run::{run_scenario, RunSettings};
use scenario::{parse_param_arg, parse_sweep_arg, Mode, Scenario};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration (flags, parameters, scenario file): exit 2.
    Config(String),
    /// Numerical failure (quadrature, search, grid resolution): exit 3.
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl From<cvct::Error> for CliError {
    fn from(e: cvct::Error) -> Self {
        match e {
            cvct::Error::Domain(_) | cvct::Error::Usage(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// Teleportation through two-mode CV cluster states under finite-width
/// momentum measurements: probabilities, fidelities, chains, verification.
#[derive(Parser, Debug)]
#[command(name = "cvct", version, about)]
struct Args {
    /// Scenario mode: single-prob | single-fidelity | avg-fidelity |
    /// chain-prob | chain-fidelity | optimize-center | optimize-theta |
    /// wigner | verify
    #[arg(long)]
    mode: Option<String>,

    /// Scenario parameter as key=value; repeatable, overrides the file
    #[arg(long = "param")]
    params: Vec<String>,

    /// Sweep axis as key:from:to:steps (inclusive endpoints, steps >= 2)
    #[arg(long)]
    sweep: Option<String>,

    /// Scenario file: flat JSON object with mode, parameters and sweep
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,

    /// Grid nodes for oracle-backed modes (wigner, verify); power of two
    #[arg(long = "grid-points", default_value_t = 8192)]
    grid_points: usize,

    /// Override the pass/fail tolerance of every verify-mode check
    #[arg(long)]
    tol: Option<f64>,

    /// Worker threads for sweeps (fallback: CVCT_THREADS, then all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(args: &Args) -> Result<Option<usize>, CliError> {
    if let Some(n) = args.threads {
        return Ok(Some(n));
    }
    match std::env::var("CVCT_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Config(format!("CVCT_THREADS is not a thread count: {raw}"))
            })?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn build_scenario(args: &Args) -> Result<Scenario, CliError> {
    let mode_override = args.mode.as_deref().map(Mode::parse).transpose()?;
    let cli_params: Vec<(String, f64)> = args
        .params
        .iter()
        .map(|raw| parse_param_arg(raw))
        .collect::<Result<_, _>>()?;
    let cli_sweep = args.sweep.as_deref().map(parse_sweep_arg).transpose()?;

    match &args.scenario {
        Some(path) => scenario::load_scenario_file(path, mode_override, &cli_params, cli_sweep),
        None => {
            let mode = mode_override
                .ok_or_else(|| CliError::Config("either --mode or --scenario is required".into()))?;
            Scenario::new(mode, &cli_params, cli_sweep)
        }
    }
}

fn execute(args: &Args) -> Result<usize, CliError> {
    let scenario = build_scenario(args)?;
    if !args.grid_points.is_power_of_two() || args.grid_points < 512 {
        return Err(CliError::Config(format!(
            "--grid-points must be a power of two >= 512, got {}",
            args.grid_points
        )));
    }
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
        }
    }
    let settings = RunSettings {
        grid_points: args.grid_points,
        tol: args.tol,
    };

    let run = match thread_count(args)? {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(|| run_scenario(&scenario, &settings))?
        }
        None => run_scenario(&scenario, &settings)?,
    };

    let write = |out: &mut dyn Write| -> std::io::Result<()> {
        match args.format.as_str() {
            "json" => run.table.write_json(&mut *out),
            _ => run.table.write_csv(&mut *out),
        }
    };
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
            write(&mut file)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        }
        None => {
            let stdout = std::io::stdout();
            write(&mut stdout.lock())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(run.verify_failures)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("verification failed: {failures} check(s) above tolerance");
            ExitCode::from(3)
        }
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ CliError::Numeric(_)) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
