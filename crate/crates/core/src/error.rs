use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    #[error("evaluation budget exhausted ({limit} evaluations)")]
    BudgetExhausted { limit: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("solver configuration: {0}")]
    SolverConfig(String),

    #[error("invalid checkpoints: {0}")]
    InvalidCheckpoints(String),

    #[error("invalid performance value: {0}")]
    InvalidPerformance(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("selector: {0}")]
    Selector(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("missing upstream artifact {path}: run stage `{stage}` first")]
    MissingUpstream { stage: &'static str, path: PathBuf },

    #[error("schema mismatch in {path}: {detail}")]
    SchemaMismatch { path: PathBuf, detail: String },

    #[error("model file: {0}")]
    Model(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    /// Short machine-readable name used in the CLI's structured error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidBounds(_) => "invalid_bounds",
            Error::InvalidSample(_) => "invalid_sample",
            Error::SolverConfig(_) => "solver_config",
            Error::InvalidCheckpoints(_) => "invalid_checkpoints",
            Error::InvalidPerformance(_) => "invalid_performance",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::Selector(_) => "selector",
            Error::Evaluation(_) => "evaluation",
            Error::InvalidConfig(_) => "invalid_config",
            Error::MissingUpstream { .. } => "missing_upstream",
            Error::SchemaMismatch { .. } => "schema_mismatch",
            Error::Model(_) => "model",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json { .. } => "json",
        }
    }
}
