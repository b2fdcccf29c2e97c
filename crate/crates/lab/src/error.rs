use sigma_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Process exit status: 2 for bad input, 1 for everything that failed while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Usage(_) | LabError::Grid(_) | LabError::Json(_) => 2,
            LabError::Core(CoreError::Domain(_))
            | LabError::Core(CoreError::EffectiveDamping { .. })
            | LabError::Core(CoreError::Regime { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
