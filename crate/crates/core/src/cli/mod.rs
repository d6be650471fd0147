//! Command-line front end: configuration, command runners and result emission.

pub mod commands;
pub mod config;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::error::Error;
pub use commands::{run, Outcome, RunOptions};
pub use config::{parse_config, Command, ConfigError, ExperimentConfig, Format};
pub use table::{Cell, ResultTable};

/// Environment variable fixing the size of the rayon worker pool.
pub const THREADS_ENV: &str = "QMS_EPR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qms-epr", version, about = "Entropy production of quantum Markov semigroups")]
pub struct Args {
    /// Command to run; overrides `command` in the configuration.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON experiment configuration.
    #[arg(long, short)]
    pub config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Largest time of the geometric grid.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Seed for the randomized checks of `verify`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    /// 1 for input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(Error::Validation(_) | Error::Dimension(_)) => 1,
            CliError::Numerical(_) | CliError::VerifyFailed(_) => 2,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(CliError::Usage(format!("{THREADS_ENV} must be at least 1")));
    }
    // a pool may already exist when the library is embedded; keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn format_for(args: &Args, config: &ExperimentConfig, dest: Option<&Path>) -> Format {
    let from_ext = dest
        .and_then(|p| p.extension())
        .filter(|e| e.eq_ignore_ascii_case("json"))
        .map(|_| Format::Json);
    args.format
        .or(config.output.as_ref().and_then(|o| o.format))
        .or(from_ext)
        .unwrap_or(Format::Csv)
}

fn emit(table: &ResultTable, format: Format, out: impl Write) -> io::Result<()> {
    match format {
        Format::Csv => table.write_csv(out).map_err(io::Error::other),
        Format::Json => table.write_json(out),
    }
}

/// Runs the command line and returns the table that was written.
pub fn execute(args: &Args) -> Result<ResultTable, CliError> {
    configure_threads()?;
    let config = read_config(&args.config)?;
    let opts = RunOptions {
        command: args.command,
        t0: args.t0,
        levels: args.levels,
        seed: args.seed,
    };
    let outcome = run(&config, &opts)?;
    let dest = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.path.clone()));
    let format = format_for(args, &config, dest.as_deref());
    let written = match &dest {
        Some(path) => File::create(path)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                emit(&outcome.table, format, &mut w)?;
                w.flush()
            })
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => emit(&outcome.table, format, io::stdout().lock())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    };
    written?;
    if outcome.failed {
        let failing = failing_checks(&outcome.table);
        return Err(CliError::VerifyFailed(failing.join(", ")));
    }
    Ok(outcome.table)
}

fn failing_checks(table: &ResultTable) -> Vec<String> {
    let (Some(names), Some(pass)) = (table.column("check"), table.column("pass")) else {
        return Vec::new();
    };
    names
        .iter()
        .zip(pass)
        .filter(|(_, p)| **p == Cell::Bool(false))
        .map(|(n, _)| n.to_csv_field())
        .collect()
}

/// Entry point for the binary: parses arguments, runs, and reports errors on stderr.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("qms-epr: {e}");
            e.exit_code()
        }
    }
}
