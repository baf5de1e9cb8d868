use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(densinv_core::Error),

    #[error("{0}")]
    Divergence(densinv_core::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 0 success, 2 config, 3 numeric or output, 4 divergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) | Self::Output(_) => 3,
            Self::Divergence(_) => 4,
        }
    }
}

impl From<densinv_core::Error> for CliError {
    fn from(e: densinv_core::Error) -> Self {
        match e {
            densinv_core::Error::Divergence { .. } => Self::Divergence(e),
            other => Self::Numeric(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Core errors raised while building inputs from the scenario count as
/// configuration errors.
pub fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}
