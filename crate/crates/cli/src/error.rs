use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("numerical failure: {0}")]
    Numeric(#[from] mri_core::Error),
    #[error("numerical failure: {0}")]
    NumericMsg(String),
    #[error("sample budget exhausted before reaching the tolerance")]
    BudgetExhausted,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for config and file access, 3 for numerical failures, 4 for an exhausted budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numeric(_) | CliError::NumericMsg(_) => 3,
            CliError::BudgetExhausted => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
