use std::path::PathBuf;

use cbgame_core::Error as CoreError;

/// Errors surfaced by the command line, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation, config file or output location.
    #[error("{0}")]
    Config(String),
    /// The request is well formed but has no solution.
    #[error("infeasible request: {0}")]
    Infeasible(CoreError),
    /// A solver or oracle failed.
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("internal failure: {0}")]
    Internal(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv { .. } => 1,
            CliError::Infeasible(_) => 2,
            CliError::Numerical(_) | CliError::Internal(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::InvalidDimension
            | CoreError::InvalidGridValue { .. } => CliError::Config(e.to_string()),
            CoreError::InfeasiblePartition { .. }
            | CoreError::RequiresFullRevelation
            | CoreError::Unsupported(_)
            | CoreError::NoSignChange { .. } => CliError::Infeasible(e),
            CoreError::BoundaryWeight { .. }
            | CoreError::DegenerateBestResponse { .. }
            | CoreError::MalformedPartition(_)
            | CoreError::BracketMiss { .. }
            | CoreError::NonFinite { .. }
            | CoreError::OracleMismatch { .. }
            | CoreError::UnknownProfileKind
            | CoreError::HorizonTooShort { .. } => CliError::Numerical(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
