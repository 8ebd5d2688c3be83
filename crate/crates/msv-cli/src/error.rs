//! CLI error type with process exit codes.

use thiserror::Error;

/// Exit codes: 2 configuration, 3 data, 4 numerical failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<msv_core::model::ModelError> for CliError {
    fn from(e: msv_core::model::ModelError) -> Self {
        match e {
            msv_core::model::ModelError::InvalidConfig(msg) => CliError::Config(msg),
            msv_core::model::ModelError::Panel(p) => CliError::Data(p.to_string()),
            msv_core::model::ModelError::NonFinite { block } => {
                CliError::Numerical(format!("non-finite state in the {block} block"))
            }
        }
    }
}

impl From<msv_core::forecast::ForecastError> for CliError {
    fn from(e: msv_core::forecast::ForecastError) -> Self {
        use msv_core::forecast::ForecastError as F;
        match e {
            F::EmptyDraws | F::DimensionMismatch | F::InvalidHorizon => {
                CliError::Config(e.to_string())
            }
            F::NotPositiveDefinite | F::WeightCollapse { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}
