use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use litreview_core::LabelSet;
use serde::{Deserialize, Serialize};

use crate::LlmError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModelId {
    pub provider: String,
    pub model_name: String,
}

impl ModelId {
    pub fn new(provider: impl Into<String>, model_name: impl Into<String>) -> Result<Self, LlmError> {
        let id = ModelId {
            provider: provider.into(),
            model_name: model_name.into(),
        };
        if id.provider.trim().is_empty() || id.model_name.trim().is_empty() {
            return Err(LlmError::EmptyModelId);
        }
        Ok(id)
    }
}

/// `provider/model_name`
impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.provider, self.model_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Parsed { labels: LabelSet },
    ParseFailure { reason: String },
    /// The request never produced a response within the retry budget.
    Error { message: String, attempts: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub record_id: String,
    pub dim_id: u32,
    pub prompt_id: String,
    pub model: ModelId,
    /// 1..=k
    pub run_index: u32,
    /// Empty when the request failed.
    pub raw_response: String,
    #[serde(flatten)]
    pub outcome: RunOutcome,
    pub latency_ms: u64,
    pub timestamp: DateTime<Utc>,
}

impl RunResult {
    pub fn labels(&self) -> Option<&LabelSet> {
        match &self.outcome {
            RunOutcome::Parsed { labels } => Some(labels),
            _ => None,
        }
    }

    pub fn is_parse_failure(&self) -> bool {
        matches!(self.outcome, RunOutcome::ParseFailure { .. })
    }

    pub fn is_error(&self) -> bool {
        matches!(self.outcome, RunOutcome::Error { .. })
    }

    /// Unique within an experiment.
    pub fn key(&self) -> (&str, u32, &ModelId, u32) {
        (&self.record_id, self.dim_id, &self.model, self.run_index)
    }

    /// The same result with latency and timestamp zeroed, for replay
    /// comparisons.
    pub fn without_timing(&self) -> RunResult {
        RunResult {
            latency_ms: 0,
            timestamp: DateTime::<Utc>::UNIX_EPOCH,
            ..self.clone()
        }
    }
}

/// Appends one JSON object per result.
pub fn write_jsonl(path: &Path, results: &[RunResult]) -> Result<(), LlmError> {
    let io = |e: std::io::Error| LlmError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    for r in results {
        serde_json::to_writer(&mut w, r).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)?;
    w.get_ref().sync_all().map_err(io)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RunResult>, LlmError> {
    let io = |e: std::io::Error| LlmError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| LlmError::Jsonl {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
