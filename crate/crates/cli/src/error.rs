use std::path::PathBuf;

use chansim_core::SimulateError;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] chansim_core::Error),
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<chansim_core::CertifyError> for CliError {
    fn from(e: chansim_core::CertifyError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<chansim_core::ChannelError> for CliError {
    fn from(e: chansim_core::ChannelError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<chansim_core::LinalgError> for CliError {
    fn from(e: chansim_core::LinalgError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    /// Infeasible simulations are a mathematical answer, not a failure.
    pub fn is_negative_result(&self) -> bool {
        matches!(
            self,
            CliError::Core(chansim_core::Error::Simulate(
                SimulateError::TransportInfeasible { .. }
                    | SimulateError::LpInfeasible { .. }
                    | SimulateError::NotMajorized { .. }
            ))
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Input(_) => "input",
            _ if self.is_negative_result() => "infeasible",
            CliError::Core(_) => "numerical",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
