//! Replicated classification runs against chat-completion back-ends.

mod backend;
mod batch;
mod config;
mod http;
mod mock;
mod result;
mod vote;

pub use backend::{BackendError, ChatBackend, RequestContext};
pub use batch::{classify_batch, BatchRequest};
pub use config::ClientConfig;
pub use http::HttpBackend;
pub use mock::MockBackend;
pub use result::{read_jsonl, write_jsonl, ModelId, RunOutcome, RunResult};
pub use vote::{final_labels, FinalLabels};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("environment variable `{0}` with the API key is not set")]
    MissingApiKey(String),
    #[error("invalid client config: {0}")]
    Config(String),
    #[error("model id needs a provider and a model name")]
    EmptyModelId,
    #[error("replication count k must be at least 1")]
    ZeroReplication,
    #[error("no records to classify")]
    NoRecords,
    #[error("record `{0}` has no abstract")]
    MissingAbstract(String),
    #[error(transparent)]
    Prompt(#[from] litreview_core::taxonomy::PromptError),
    #[error(transparent)]
    Taxonomy(#[from] litreview_core::taxonomy::TaxonomyError),
    #[error("runs mix {0}")]
    MixedRuns(&'static str),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}, line {line}: {message}")]
    Jsonl {
        path: String,
        line: usize,
        message: String,
    },
    #[error("worker task failed: {0}")]
    Join(String),
}
