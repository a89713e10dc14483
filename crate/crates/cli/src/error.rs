use std::path::PathBuf;

use nbsplan::error::{InstanceError, MilpError, ReportError, SolveError};
use serde::Serialize;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("could not parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config file {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Instance(e) => e.code(),
            Self::Milp(_) => "milp.build",
            Self::Solve(e) => e.code(),
            Self::Report(e) => e.code(),
            Self::Io { .. } => "cli.io",
            Self::Parse { .. } => "cli.parse",
            Self::Config { .. } => "cli.config",
            Self::Usage(_) => "cli.usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Instance(InstanceError::Io { .. })
            | Self::Solve(SolveError::Io { .. })
            | Self::Report(ReportError::Io { .. } | ReportError::Image(_))
            | Self::Io { .. } => EXIT_IO,
            Self::Solve(SolveError::Config(_)) => EXIT_VALIDATION,
            Self::Solve(_) => EXIT_SOLVE,
            _ => EXIT_VALIDATION,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.code(),
            message: self.to_string(),
        })
        .expect("plain strings")
    }
}
