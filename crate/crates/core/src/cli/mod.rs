//! Experiment harness: config parsing, builtin problems, report generation
//! and the admissibility checker behind the `openbc` binary.

use thiserror::Error;

use crate::ibvp::SolveError;

pub mod builtins;
pub mod config;
pub mod expr;
pub mod harness;

pub use config::{parse_config, ExperimentConfig};
pub use harness::{bc_check, run_convergence, run_experiment, RunReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("audit failure: {0}")]
    Audit(String),
}

impl CliError {
    /// Process exit code: 2 config error, 3 solver failure, 4 unexpected
    /// audit failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Json(_) => 2,
            CliError::Solve(_) => 3,
            CliError::Audit(_) => 4,
        }
    }
}
