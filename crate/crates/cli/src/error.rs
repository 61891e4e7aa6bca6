use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 config, 3 convergence, 4 invariant or I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Invariant(_) | CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<fracsub::error::Error> for CliError {
    fn from(e: fracsub::error::Error) -> Self {
        use fracsub::error::Error as E;
        let msg = e.to_string();
        match e {
            E::Domain(_) | E::Config(_) => CliError::Config(msg),
            E::Convergence { .. } | E::SeriesCap { .. } | E::Accuracy { .. } => {
                CliError::Convergence(msg)
            }
            _ => CliError::Invariant(msg),
        }
    }
}
