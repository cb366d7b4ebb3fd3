//! Command-line front end for `npe-core`.

pub mod args;
mod commands;

use std::fmt;
use std::process::ExitCode;

pub use args::{Cli, Command};
pub use commands::{
    cmd_convert, cmd_estimate, cmd_generate, cmd_ops, cmd_run, cmd_separate, parse_methods,
    parse_seeds,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(npe_core::Error),
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_degenerate_data() => 3,
            CliError::Core(
                npe_core::Error::Config(_)
                | npe_core::Error::InvalidParameter(_)
                | npe_core::Error::OutOfRange(_)
                | npe_core::Error::Io { .. },
            ) => 2,
            CliError::Core(_) | CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Internal(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<npe_core::Error> for CliError {
    fn from(e: npe_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Applies `NPE_THREADS` to the global rayon pool.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("NPE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Usage(format!("NPE_THREADS must be a positive integer, got `{v}`"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.into()))
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Separate(a) => cmd_separate(&a),
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Ops(a) => cmd_ops(&a),
        Command::Convert(a) => cmd_convert(&a),
    }
}

/// Parses arguments, runs the command and maps failures to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match init_threads().and_then(|_| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("npe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
