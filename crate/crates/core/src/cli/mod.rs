//! Command-line front end: configuration, execution and run manifests.

mod config;
mod run;

pub use config::{parse_config, CommandKind, OutputFormat, PartialConfig, RunConfig, StateKind};
pub use run::{run, FileRecord, RunManifest, WORKERS_ENV};

use crate::error::QuditError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<QuditError> for CliError {
    fn from(e: QuditError) -> Self {
        match e {
            QuditError::InvalidDimension { .. }
            | QuditError::IndexOutOfRange { .. }
            | QuditError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

/// Parses `argv` (program name first), runs it and returns the exit code.
/// Diagnostics go to stderr, the manifest path to stdout.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_config(argv) {
        Ok(c) => c,
        Err(exit) => {
            if exit.code == EXIT_OK {
                print!("{}", exit.message);
            } else {
                eprint!("{}", exit.message);
            }
            return exit.code;
        }
    };
    match run(&config) {
        Ok((path, _)) => {
            println!("{}", path.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Early termination from argument parsing: help/version (code 0) or a usage error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigExit {
    pub code: i32,
    pub message: String,
}

impl ConfigExit {
    pub(crate) fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: format!("error: {}\n", message.into()),
        }
    }
}
