//! Command-line front end for profile solves, Evans evaluations, winding
//! numbers, low-frequency fits and regime scans.

mod config;
mod output;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{ConfigError, RunConfig};
use output::write_atomic;
use tasks::TaskError;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "evans", version, about = "Evans functions for viscous shock profiles")]
struct Cli {
    #[command(subcommand)]
    task: Task,
    /// TOML run configuration; defaults are used for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for data files, summary.json and error.json.
    #[arg(long, global = true, default_value = "evans-out")]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Formulation tag, e.g. integrated_1d, flux_1d, mbf.
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Registered system name.
    #[arg(long, global = true)]
    system: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Task {
    /// Solve for the viscous profile.
    Profile,
    /// Evaluate the Evans function at a list of frequencies.
    Eval,
    /// Winding number of the Evans function around a contour.
    Contour,
    /// Low-frequency fit against the Lopatinski determinant.
    Lowfreq,
    /// Small-shell balanced-flux samples and intermediate windings.
    RegimeScan,
    /// Print the default configuration.
    PrintDefaults,
}

fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = &cli.system {
        cfg.system = s.clone();
    }
    if let Some(v) = &cli.variant {
        cfg.variant = v.clone();
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    Ok(cfg)
}

fn fail(out: &Path, code: u8, record: serde_json::Value, message: &str) -> ExitCode {
    eprintln!("error: {message}");
    let text = serde_json::to_string_pretty(&record).expect("error record serializes");
    if let Err(e) = write_atomic(out, "error.json", format!("{text}\n").as_bytes()) {
        eprintln!("error: cannot write error record: {e}");
    }
    ExitCode::from(code)
}

fn config_failure(out: &Path, e: &ConfigError) -> ExitCode {
    let record = json!({ "status": "error", "kind": "config", "field": e.field, "message": e.message });
    fail(out, EXIT_CONFIG, record, &e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Task::PrintDefaults = cli.task {
        print!("{}", RunConfig::default().to_toml());
        return ExitCode::SUCCESS;
    }
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => return config_failure(&cli.out, &e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(p) => p,
        Err(e) => return config_failure(&cli.out, &ConfigError::new("jobs", e.to_string())),
    };
    let run = match cli.task {
        Task::Profile => tasks::profile,
        Task::Eval => tasks::eval,
        Task::Contour => tasks::contour,
        Task::Lowfreq => tasks::lowfreq,
        Task::RegimeScan => tasks::regime_scan,
        Task::PrintDefaults => unreachable!(),
    };
    match pool.install(|| run(&cfg)) {
        Ok(artifacts) => match artifacts.write(&cli.out) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: cannot write results to {}: {e}", cli.out.display());
                ExitCode::from(EXIT_IO)
            }
        },
        Err(TaskError::Config(e)) => config_failure(&cli.out, &e),
        Err(TaskError::Numerical { context, error }) => {
            let message = format!("{context}: {error}");
            let record = json!({
                "status": "error",
                "kind": "numerical",
                "error": error.kind(),
                "context": context,
                "message": error.to_string(),
            });
            fail(&cli.out, EXIT_NUMERICAL, record, &message)
        }
    }
}
