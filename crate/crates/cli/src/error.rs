use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid value for `{key}`: {message}")]
    Usage { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Solver(#[from] netopt::Error),
    #[error("non-finite sum rate for scenario seed {seed} ({method})")]
    NonFiniteRate { seed: u64, method: &'static str },
}

impl CliError {
    pub fn usage(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Usage {
            key: key.into(),
            message: message.into(),
        }
    }
}
