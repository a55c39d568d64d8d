use thiserror::Error;

/// Errors raised by grid construction, hypothesis checks and the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis {hypothesis} failed: {detail}")]
    Hypothesis { hypothesis: String, detail: String },

    #[error("lambda window violated: {0}")]
    Window(String),

    #[error("no convergence in {stage}: {detail}")]
    NonConvergence { stage: String, detail: String },

    #[error("certificate {name} failed: {detail}")]
    Certificate { name: String, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn hypothesis(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Hypothesis {
            hypothesis: name.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn stalled(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::NonConvergence {
            stage: stage.into(),
            detail: detail.into(),
        }
    }
}
