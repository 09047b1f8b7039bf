use async_trait::async_trait;
use thiserror::Error;

use crate::ModelId;

/// Which run a request belongs to; retries keep the same `run_index` and
/// bump `attempt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestContext {
    pub record_id: String,
    pub dim_id: u32,
    pub run_index: u32,
    /// 0 for the first try.
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl BackendError {
    /// Connection problems, rate limiting and server errors are worth
    /// another try; client errors and garbled bodies are not.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status == 429 || *status >= 500,
            BackendError::Malformed(_) => false,
        }
    }
}

/// One chat completion: a single user message in, the reply text out.
#[async_trait]
pub trait ChatBackend: Send + Sync {
    async fn complete(
        &self,
        model: &ModelId,
        prompt: &str,
        ctx: &RequestContext,
    ) -> Result<String, BackendError>;
}
