use thiserror::Error;

/// Errors raised by analyses and model construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("ensemble error: {0}")]
    Ensemble(String),

    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("command sets intersect: {0:?}")]
    CommandClash(Vec<String>),

    #[error("policies are incompatible on shared agents: {0}")]
    IncompatiblePolicies(String),

    #[error("extension error ({condition}): {detail} (worst residual {residual:.3e})")]
    Extension {
        condition: &'static str,
        detail: String,
        residual: f64,
    },

    #[error("limit exceeded: {0}")]
    Limit(String),

    #[error("soundness cross-check failed: {0}")]
    Soundness(String),

    #[error("parse error at {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn dim(detail: impl Into<String>) -> Self {
        Error::Dimension(detail.into())
    }

    pub(crate) fn model(detail: impl Into<String>) -> Self {
        Error::Model(detail.into())
    }

    /// Stable machine-readable tag, used by the CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DimensionError",
            Error::Model(_) => "ModelError",
            Error::Ensemble(_) => "EnsembleError",
            Error::Invalid { .. } => "ValidationError",
            Error::Oracle(_) => "OracleError",
            Error::CommandClash(_) => "CommandClashError",
            Error::IncompatiblePolicies(_) => "IncompatiblePoliciesError",
            Error::Extension { .. } => "ExtensionError",
            Error::Limit(_) => "LimitError",
            Error::Soundness(_) => "SoundnessError",
            Error::Parse { .. } => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
