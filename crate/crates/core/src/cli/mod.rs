//! Batch front end: `moran-check --config run.json`.
//!
//! Exit status is 0 on pass, 2 on fail, 3 on inconclusive and 1 on any
//! usage, config or I/O error.

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::{Command, Overrides, Resolved, RunConfig, SpectrumSource, TheoremParams};
pub use run::{render_csv, run, RunOutcome, RunReport};

/// Report schema shipped with the crate.
pub const REPORT_SCHEMA: &str = include_str!("../../../../docs/report-schema.json");

pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "moran-check",
    version,
    about = "Spectrality checks for three-digit Moran measures"
)]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Report destination (default: the config's output.report, else stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `xi,value` table destination for q-scan and probe.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Seed for randomized sub-checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    let outcome = pool.install(|| run(&cfg, args.seed))?;

    let write = |path: &PathBuf, body: &str| {
        std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    };
    let text = outcome.report.render();
    match args.out.as_ref().or(cfg.output.report.as_ref()) {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if let (Some(p), Some(csv)) = (args.csv.as_ref().or(cfg.output.csv.as_ref()), outcome.csv()) {
        write(p, &csv)?;
    }
    Ok(outcome.report.exit_status)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("moran-check: {e}");
            EXIT_USAGE
        }
    }
}
