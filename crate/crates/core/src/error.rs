use thiserror::Error;

/// Errors raised by the causal-advisor core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("graph is not a DAG: {0}")]
    NotADag(String),
    #[error("graph size mismatch: {left} vs {right} nodes")]
    SizeMismatch { left: usize, right: usize },
    #[error("column `{column}` has zero variance")]
    ZeroVariance { column: String },
    #[error("matrix is numerically singular (reciprocal condition {rcond:.3e})")]
    SingularMatrix { rcond: f64 },
    #[error("insufficient sample: n = {n}, need more than {needed}")]
    InsufficientSample { n: usize, needed: usize },
    #[error("degenerate correlation r = {r}")]
    DegenerateCorrelation { r: f64 },
    #[error("rank-deficient design for `{context}`")]
    RankDeficiency { context: String },
    #[error("knowledge conflict: {0}")]
    KnowledgeConflict(String),
    #[error("missing value for node `{0}`")]
    MissingValue(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("no causal effect of {from} on {to}")]
    ZeroEffect { from: String, to: String },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("file is empty")]
    EmptyFile,
    #[error("duplicate header `{0}`")]
    DuplicateHeader(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (singular systems, degenerate
    /// statistics, vanishing effects) as opposed to bad input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::DegenerateCorrelation { .. }
                | Error::RankDeficiency { .. }
                | Error::ZeroEffect { .. }
                | Error::InsufficientSample { .. }
        )
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Cycle => "cycle",
            Error::NotADag(_) => "not_a_dag",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::ZeroVariance { .. } => "zero_variance",
            Error::SingularMatrix { .. } => "singular_matrix",
            Error::InsufficientSample { .. } => "insufficient_sample",
            Error::DegenerateCorrelation { .. } => "degenerate_correlation",
            Error::RankDeficiency { .. } => "rank_deficiency",
            Error::KnowledgeConflict(_) => "knowledge_conflict",
            Error::MissingValue(_) => "missing_value",
            Error::UnknownNode(_) => "unknown_node",
            Error::ZeroEffect { .. } => "zero_effect",
            Error::InvalidQuery(_) => "invalid_query",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidData(_) => "invalid_data",
            Error::Parse { .. } => "parse",
            Error::EmptyFile => "empty_file",
            Error::DuplicateHeader(_) => "duplicate_header",
            Error::UnknownColumn(_) => "unknown_column",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
