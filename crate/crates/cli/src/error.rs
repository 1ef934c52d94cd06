use multisage::embed::{CheckpointError, EmbedError};
use multisage::eval::EvalError;
use multisage::experiments::ExperimentError;
use multisage::graph::GraphError;
use multisage::ingest::IngestError;
use thiserror::Error;

/// Failure classes, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Diverged { .. } => CliError::Numeric(e.to_string()),
            EmbedError::Config(_) => CliError::Config(e.to_string()),
            EmbedError::Dimension(_) | EmbedError::NoNegativeCandidates(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::NonFiniteScore(_) => CliError::Numeric(e.to_string()),
            EvalError::InvalidParameter(_) | EvalError::NoRuns => CliError::Config(e.to_string()),
            EvalError::Io(_) => CliError::Other(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Embed(e) => e.into(),
            ExperimentError::Eval(e) => e.into(),
            ExperimentError::Ingest(e) => e.into(),
            ExperimentError::Graph(e) => e.into(),
            ExperimentError::Config(m) => CliError::Config(m),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        match e {
            CheckpointError::Io(_) => CliError::Other(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
