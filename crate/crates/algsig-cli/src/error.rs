use std::process::ExitCode;

use thiserror::Error;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success = 0,
    /// A theorem hypothesis or precondition does not hold for the requested run.
    Hypothesis = 2,
    /// A measured quantity exceeded its bound or an oracle.
    Verification = 3,
    Io = 4,
    Config = 5,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Numeric(#[from] algsig::error::Error),
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn status(&self) -> Status {
        use algsig::error::Error as E;
        match self {
            CliError::Config(_) | CliError::Json(_) => Status::Config,
            CliError::Io { .. } => Status::Io,
            CliError::Csv(e) if e.is_io_error() => Status::Io,
            CliError::Csv(_) => Status::Config,
            CliError::Numeric(e) => match e {
                E::InvalidParameter(_) | E::Domain(_) => Status::Config,
                E::Precondition(_) | E::Capability(_) => Status::Hypothesis,
                E::Convergence(_) | E::Capacity(_) | E::Accuracy { .. } | E::Consistency(_) => Status::Verification,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
