use litreview_core::ingest::IngestError;
use litreview_core::metrics::MetricsError;
use litreview_core::taxonomy::TaxonomyError;
use litreview_llm::LlmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("unknown record `{0}`")]
    UnknownRecord(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("invalid {kind} entry: {message}")]
    Schema { kind: &'static str, message: String },
    #[error("invalid query: {0}")]
    Query(String),
    #[error("{0}")]
    Conflict(String),
    #[error("no active experiment configuration")]
    NoActiveConfig,
    #[error("experiment `{0}` needs at least two models or two runs per record")]
    NothingToCompare(String),
    #[error("ledger {path}: {message}")]
    Storage { path: String, message: String },
    #[error("ledger {path}, line {line}: {message}")]
    Corrupt {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl KbError {
    pub(crate) fn schema(kind: &'static str, message: impl Into<String>) -> Self {
        KbError::Schema {
            kind,
            message: message.into(),
        }
    }
}

pub type Result<T, E = KbError> = std::result::Result<T, E>;
