use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// I/O failures, malformed arguments and other general errors.
    pub const GENERAL: u8 = 1;
    /// Command-line parse errors (reported by clap).
    pub const USAGE: u8 = 2;
    /// The game file, generator spec or strategy file is invalid.
    pub const VALIDATION: u8 = 3;
    /// Value iteration hit `--max-iters` before meeting `--epsilon`.
    pub const NONCONVERGENCE: u8 = 4;
    /// The brute-force enumeration guard was exceeded.
    pub const GUARD_EXCEEDED: u8 = 5;
    /// Strategy iteration stalled on rounding noise in floating point mode.
    pub const STALL: u8 = 6;
    /// A verification check (optimality, identities, lemmas, bound) failed.
    pub const CHECK_FAILED: u8 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    General(String),
    #[error("{0}")]
    Invalid(String),
    #[error("no convergence after {iterations} iterations (last delta {delta})")]
    NotConverged { iterations: usize, delta: String },
    #[error("{0}")]
    GuardExceeded(String),
    #[error("{0}")]
    Stall(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Output(_) | CliError::Csv(_) | CliError::General(_) => exit::GENERAL,
            CliError::Invalid(_) => exit::VALIDATION,
            CliError::NotConverged { .. } => exit::NONCONVERGENCE,
            CliError::GuardExceeded(_) => exit::GUARD_EXCEEDED,
            CliError::Stall(_) => exit::STALL,
            CliError::CheckFailed(_) => exit::CHECK_FAILED,
        }
    }
}
