use std::path::Path;
use std::sync::{Mutex, RwLock, RwLockReadGuard};

use chrono::Utc;
use litreview_core::Taxonomy;

use crate::error::{KbError, Result};
use crate::ledger::{ExperimentMeta, GoldLabel, Ledger, LedgerEntry, Payload};
use crate::state::{GoldEntry, Pending, State};
use crate::{GoldAck, GoldSubmission};

/// Ledger plus the indexes rebuilt from it. Appends go through one writer;
/// reads share the state and may run while an append is being synced.
#[derive(Debug)]
pub struct KnowledgeBase {
    writer: Mutex<Ledger>,
    state: RwLock<State>,
}

impl KnowledgeBase {
    /// Opens the ledger at `path` and replays it.
    pub fn open(path: &Path, taxonomy: Taxonomy) -> Result<Self> {
        taxonomy.validate()?;
        let (ledger, entries) = Ledger::open(path)?;
        let mut state = State::new(taxonomy);
        for entry in entries {
            let seq = entry.seq;
            state.replay(entry).map_err(|e| KbError::Corrupt {
                path: path.display().to_string(),
                line: 0,
                message: format!("entry {seq}: {e}"),
            })?;
        }
        tracing::debug!(entries = state.entries, path = %path.display(), "ledger replayed");
        Ok(KnowledgeBase {
            writer: Mutex::new(ledger),
            state: RwLock::new(state),
        })
    }

    pub fn state(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    /// Validates and durably appends one entry.
    pub fn append(&self, payload: Payload) -> Result<LedgerEntry> {
        Ok(self.append_all(vec![payload])?.remove(0))
    }

    /// Validates every payload, then writes them with one sync. Nothing is
    /// written if any payload is rejected.
    pub fn append_all(&self, payloads: Vec<Payload>) -> Result<Vec<LedgerEntry>> {
        if payloads.is_empty() {
            return Ok(Vec::new());
        }
        let mut ledger = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        self.commit(&mut ledger, payloads)
    }

    fn commit(&self, ledger: &mut Ledger, payloads: Vec<Payload>) -> Result<Vec<LedgerEntry>> {
        {
            let state = self.state();
            let mut pending = Pending::default();
            for p in &payloads {
                state.check(p, &pending)?;
                State::note_pending(&mut pending, p);
            }
        }
        let entries = ledger.append_all(payloads)?;
        let mut state = self.state.write().unwrap_or_else(|e| e.into_inner());
        for e in &entries {
            state.apply(e.clone());
        }
        Ok(entries)
    }

    pub fn put_experiment(&self, meta: ExperimentMeta) -> Result<LedgerEntry> {
        self.append(Payload::ExperimentMeta(meta))
    }

    /// Stores an expert label as the active gold for (record, dim). With
    /// `supersedes` set, the write only goes through if that is still the
    /// sequence number of the active gold (0 meaning none yet).
    pub fn record_gold_label(&self, sub: GoldSubmission) -> Result<GoldAck> {
        let mut ledger = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let gold = GoldLabel {
            record_id: sub.record_id,
            dim_id: sub.dim_id,
            labels: sub.labels,
            annotator: sub.annotator,
            entered_at: sub.entered_at.unwrap_or_else(Utc::now),
        };
        let prior = {
            let state = self.state();
            state.record(&gold.record_id)?;
            let prior = state.active_gold(&gold.record_id, gold.dim_id).map(|g| g.seq);
            if let Some(expected) = sub.supersedes {
                if prior.unwrap_or(0) != expected {
                    return Err(KbError::Conflict(format!(
                        "gold for `{}` dimension {} was superseded by entry {}",
                        gold.record_id,
                        gold.dim_id,
                        prior.unwrap_or(0)
                    )));
                }
            }
            prior
        };
        let entry = self.commit(&mut ledger, vec![Payload::GoldLabel(gold)])?.remove(0);
        let Payload::GoldLabel(g) = &entry.payload else {
            unreachable!("committed a gold label")
        };
        Ok(GoldAck {
            seq: entry.seq,
            record_id: g.record_id.clone(),
            dim_id: g.dim_id,
            labels: g.labels.clone(),
            superseded: prior,
            report_version: self.state().report_version(g.dim_id),
        })
    }

    pub fn gold_history(&self, record_id: &str, dim_id: u32) -> Vec<GoldEntry> {
        self.state()
            .gold
            .get(&(record_id.to_owned(), dim_id))
            .cloned()
            .unwrap_or_default()
    }
}
