//! Command-line driver: stability verdicts, steady states, correlation
//! measures, parameter sweeps, figure presets and the randomized self-test.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use loopsteer::io::output::emit_results;
use loopsteer::io::{load_config, OutputFormat, RunConfig};
use loopsteer::model::{build_diffusion_matrix, build_drift_matrix};
use loopsteer::selftest::run_selftest;
use loopsteer::{
    check_stability, correlation_report, reproduce_figure, run_sweep, solve_steady_state_with,
    verify_physicality, Error, FigureId, LyapunovMethod,
};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "loopsteer",
    version,
    about = "Steady-state entanglement and steering in a closed-loop three-mode system"
)]
struct Cli {
    /// Run configuration (flat TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for sweeps; 0 uses all cores.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Output directory for sweep and figure files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write an SVG chart per result.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Both => OutputFormat::Both,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Method {
    BartelsStewart,
    Vectorized,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalue stability verdict, with the closed-form conditions at quadrature phases.
    Stability,
    /// Steady-state covariance matrix and its symplectic spectrum.
    Solve {
        #[arg(long, value_enum, default_value = "bartels-stewart")]
        method: Method,
    },
    /// Entanglement, steering, moments and regime for the configured mode pairs.
    Measures,
    /// Run the sweep described by the configuration's axis keys.
    Sweep,
    /// Reproduce a preset figure sweep (2a, 2b, 3, 4, 5a, 5b, 6a, 6b, 7).
    Figure { id: FigureId },
    /// Randomized closed-form, solver-agreement, criterion-equivalence and physicality checks.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// A run that completed but whose contract failed (e.g. a self-test check).
struct Failed(Value);

fn require_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Contract("this command needs --config <path>".into()))?;
    load_config(path)
}

fn out_dir(cli: &Cli, cfg: Option<&RunConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn paths(files: &[PathBuf]) -> Vec<String> {
    files.iter().map(|p| p.display().to_string()).collect()
}

fn run(cli: &Cli) -> Result<Result<Value, Failed>, Error> {
    match &cli.command {
        Command::Stability => {
            let cfg = require_config(cli)?;
            let report = check_stability(&cfg.params)?;
            Ok(Ok(json!({ "params": cfg.params, "stability": report })))
        }
        Command::Solve { method } => {
            let cfg = require_config(cli)?;
            let method = match method {
                Method::BartelsStewart => LyapunovMethod::BartelsStewart,
                Method::Vectorized => LyapunovMethod::Vectorized,
            };
            let v = solve_steady_state_with(
                &build_drift_matrix(&cfg.params)?,
                &build_diffusion_matrix(&cfg.params)?,
                method,
            )?;
            let m = v.matrix();
            let rows: Vec<Vec<f64>> = (0..6)
                .map(|i| (0..6).map(|j| m[(i, j)]).collect())
                .collect();
            Ok(Ok(json!({
                "params": cfg.params,
                "method": method,
                "covariance": rows,
                "symplectic": verify_physicality(&v)?,
            })))
        }
        Command::Measures => {
            let cfg = require_config(cli)?;
            let v = solve_steady_state_with(
                &build_drift_matrix(&cfg.params)?,
                &build_diffusion_matrix(&cfg.params)?,
                LyapunovMethod::default(),
            )?;
            let reports = cfg
                .pairs
                .iter()
                .map(|&pair| correlation_report(&v, pair))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Ok(json!({ "params": cfg.params, "reports": reports })))
        }
        Command::Sweep => {
            let cfg = require_config(cli)?;
            let spec = cfg.sweep_spec().ok_or_else(|| {
                Error::Contract("configuration has no `axis1`; nothing to sweep".into())
            })?;
            let workers = cli.workers.or(cfg.workers).unwrap_or(0);
            let result = run_sweep(&spec, workers)?;
            let stem = cli
                .config
                .as_deref()
                .and_then(Path::file_stem)
                .and_then(|s| s.to_str())
                .unwrap_or("sweep");
            let format = cli
                .format
                .map(Into::into)
                .or(cfg.format)
                .unwrap_or(OutputFormat::Csv);
            let files = emit_results(
                &result,
                &out_dir(cli, Some(&cfg)),
                stem,
                format,
                cli.plot || cfg.plot,
            )?;
            Ok(Ok(json!({
                "points": result.rows.len(),
                "unstable": result.rows.iter().filter(|r| !r.stable).count(),
                "files": paths(&files),
            })))
        }
        Command::Figure { id } => {
            let output = reproduce_figure(*id, cli.workers.unwrap_or(0))?;
            let dir = out_dir(cli, None);
            let format = cli.format.map(Into::into).unwrap_or(OutputFormat::Csv);
            let mut panels = Vec::new();
            for panel in &output.panels {
                let stem = format!("fig{}-{}", id.label(), panel.name);
                let files = emit_results(&panel.result, &dir, &stem, format, cli.plot)?;
                panels.push(json!({
                    "panel": panel.name,
                    "points": panel.result.rows.len(),
                    "unstable": panel.result.rows.iter().filter(|r| !r.stable).count(),
                    "files": paths(&files),
                }));
            }
            Ok(Ok(json!({ "figure": id.label(), "panels": panels })))
        }
        Command::Selftest { draws, seed } => {
            let report = run_selftest(*draws, *seed)?;
            let value =
                serde_json::to_value(&report).map_err(|e| Error::Serialization(e.to_string()))?;
            Ok(if report.passed() {
                Ok(value)
            } else {
                Err(Failed(value))
            })
        }
    }
}

fn print(value: &Value) {
    let mut out = std::io::stdout().lock();
    // A closed pipe (e.g. `| head`) is not an error for a report printer.
    if serde_json::to_writer_pretty(&mut out, value).is_ok() {
        let _ = writeln!(out);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Ok(value)) => {
            print(&value);
            ExitCode::SUCCESS
        }
        Ok(Err(Failed(value))) => {
            print(&value);
            eprintln!("error: self-test failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
