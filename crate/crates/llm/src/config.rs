use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::LlmError;

/// Where and how fast to send requests. The API key itself never appears
/// here, only the name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientConfig {
    /// Full chat-completions URL, e.g. `https://api.openai.com/v1/chat/completions`.
    pub endpoint_url: String,
    pub api_key_env: String,
    pub max_in_flight: usize,
    /// Extra attempts after the first failed one.
    pub retry_budget: u32,
    /// Requests started per minute; 0 disables the limit.
    pub per_minute_budget: u32,
    /// Stored with experiment metadata, never interpreted.
    #[serde(default)]
    pub temperature_policy: String,
    #[serde(default = "default_timeout")]
    pub request_timeout_secs: u64,
    #[serde(default = "default_backoff_base")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_backoff_max")]
    pub backoff_max_ms: u64,
}

fn default_timeout() -> u64 {
    120
}

fn default_backoff_base() -> u64 {
    500
}

fn default_backoff_max() -> u64 {
    30_000
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            max_in_flight: 8,
            retry_budget: 3,
            per_minute_budget: 0,
            temperature_policy: "provider default".into(),
            request_timeout_secs: default_timeout(),
            backoff_base_ms: default_backoff_base(),
            backoff_max_ms: default_backoff_max(),
        }
    }
}

impl ClientConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.max_in_flight == 0 {
            return Err(LlmError::Config("max_in_flight must be at least 1".into()));
        }
        if self.request_timeout_secs == 0 {
            return Err(LlmError::Config("request_timeout_secs must be positive".into()));
        }
        Ok(())
    }

    /// Delay before retry number `attempt` (1-based): base·2^(attempt−1),
    /// capped.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64 << attempt.saturating_sub(1).min(20);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor).min(self.backoff_max_ms))
    }
}
