//! Append-only JSON-lines ledger.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use litreview_core::{BibRecord, LabelSet, PromptSpec};
use litreview_llm::{ClientConfig, ModelId, RunResult};
use serde::{Deserialize, Serialize};

use crate::error::{KbError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    Record(BibRecord),
    RunResult(RunEntry),
    GoldLabel(GoldLabel),
    FinalLabel(FinalLabel),
    ExperimentMeta(ExperimentMeta),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Record(_) => "record",
            Payload::RunResult(_) => "run_result",
            Payload::GoldLabel(_) => "gold_label",
            Payload::FinalLabel(_) => "final_label",
            Payload::ExperimentMeta(_) => "experiment_meta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub experiment_id: String,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub record_id: String,
    pub dim_id: u32,
    pub labels: LabelSet,
    pub annotator: String,
    pub entered_at: DateTime<Utc>,
}

/// Majority-voted labels of one model for one (record, dimension), at
/// class level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalLabel {
    pub experiment_id: String,
    pub record_id: String,
    pub dim_id: u32,
    pub model: ModelId,
    pub labels: LabelSet,
    /// Voted subclasses when the prompt answers at subclass level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subclasses: Option<LabelSet>,
}

/// Models, prompts and client settings of one experiment. A later entry
/// with the same id replaces the earlier one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub experiment_id: String,
    #[serde(default)]
    pub description: String,
    pub models: Vec<ModelId>,
    /// At most one prompt per dimension.
    pub prompts: Vec<PromptSpec>,
    pub k: u32,
    pub client: ClientConfig,
    /// The configuration new batches are classified with. Marking one
    /// experiment active deactivates the others.
    #[serde(default)]
    pub active: bool,
}

impl ExperimentMeta {
    pub fn prompt_for(&self, dim_id: u32) -> Option<&PromptSpec> {
        self.prompts.iter().find(|p| p.dim_id == dim_id)
    }
}

/// Single writer over the ledger file.
#[derive(Debug)]
pub struct Ledger {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

impl Ledger {
    /// Opens or creates the ledger and returns the entries already in it.
    pub fn open(path: &Path) -> Result<(Ledger, Vec<LedgerEntry>)> {
        let storage = |e: std::io::Error| KbError::Storage {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let entries = if path.exists() {
            read_entries(path)?
        } else {
            Vec::new()
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(storage)?;
        let next_seq = entries.last().map_or(1, |e| e.seq + 1);
        Ok((
            Ledger {
                path: path.to_owned(),
                file,
                next_seq,
            },
            entries,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Writes one line per payload and syncs them to disk before returning.
    pub fn append_all(&mut self, payloads: Vec<Payload>) -> Result<Vec<LedgerEntry>> {
        let storage = |message: String| KbError::Storage {
            path: self.path.display().to_string(),
            message,
        };
        let now = Utc::now();
        let mut buf = Vec::new();
        let mut entries = Vec::with_capacity(payloads.len());
        for (i, payload) in payloads.into_iter().enumerate() {
            let entry = LedgerEntry {
                seq: self.next_seq + i as u64,
                timestamp: now,
                payload,
            };
            serde_json::to_writer(&mut buf, &entry).map_err(|e| storage(e.to_string()))?;
            buf.push(b'\n');
            entries.push(entry);
        }
        self.file
            .write_all(&buf)
            .and_then(|_| self.file.sync_data())
            .map_err(|e| storage(e.to_string()))?;
        self.next_seq += entries.len() as u64;
        Ok(entries)
    }
}

/// Reads every entry, checking that sequence numbers strictly increase.
pub fn read_entries(path: &Path) -> Result<Vec<LedgerEntry>> {
    let file = File::open(path).map_err(|e| KbError::Storage {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut out: Vec<LedgerEntry> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let corrupt = |message: String| KbError::Corrupt {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        let line = line.map_err(|e| corrupt(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LedgerEntry = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        if let Some(prev) = out.last() {
            if entry.seq <= prev.seq {
                return Err(corrupt(format!(
                    "sequence {} does not follow {}",
                    entry.seq, prev.seq
                )));
            }
        }
        out.push(entry);
    }
    Ok(out)
}
