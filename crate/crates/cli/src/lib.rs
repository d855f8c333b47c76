//! Batch front-end that runs configured experiments and writes their artifacts.

pub mod commands;
pub mod config;
pub mod output;

use clap::ValueEnum;
use serde::Serialize;

pub use config::ExperimentConfig;
pub use output::{Check, Outcome, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckParams,
    Area,
    Clusters,
    SolveTruncated,
    Residual,
    Certify,
    Contraction,
    McWilson,
    McPhi,
    U1Exact,
    VerifyLemmas,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::CheckParams,
        Command::Area,
        Command::Clusters,
        Command::SolveTruncated,
        Command::Residual,
        Command::Certify,
        Command::Contraction,
        Command::McWilson,
        Command::McPhi,
        Command::U1Exact,
        Command::VerifyLemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::CheckParams => "check-params",
            Command::Area => "area",
            Command::Clusters => "clusters",
            Command::SolveTruncated => "solve-truncated",
            Command::Residual => "residual",
            Command::Certify => "certify",
            Command::Contraction => "contraction",
            Command::McWilson => "mc-wilson",
            Command::McPhi => "mc-phi",
            Command::U1Exact => "u1-exact",
            Command::VerifyLemmas => "verify-lemmas",
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<loopeq::Error> for CliError {
    fn from(e: loopeq::Error) -> Self {
        use loopeq::Error as E;
        match e {
            E::Capacity(m) => CliError::Capacity(m),
            E::InvalidInput(_) | E::OutOfLattice(_) | E::Precondition(_) => CliError::Config(e.to_string()),
            E::Missing(_) => CliError::Runtime(e.to_string()),
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ASSERTION: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CAPACITY: i32 = 3;
    pub const RUNTIME: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Capacity(_) => exit::CAPACITY,
            CliError::Io(_) | CliError::Runtime(_) => exit::RUNTIME,
        }
    }
}

/// Runs one command on the current rayon pool.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    commands::dispatch(cmd, cfg)
}

/// Runs one command on a dedicated pool of `threads` workers.
pub fn run_with_threads(cmd: Command, cfg: &ExperimentConfig, threads: usize) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| run(cmd, cfg))
}
