//! Classifying records with an experiment's configuration.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use litreview_core::ingest::{filter_valid, parse_records, FilterReport, InputFormat};
use litreview_core::taxonomy::{subclass_to_class, LabelLevel, YES};
use litreview_core::{BibRecord, Corpus};
use litreview_llm::{classify_batch, final_labels, BatchRequest, ChatBackend, RunResult};
use serde::{Deserialize, Serialize};

use crate::error::{KbError, Result};
use crate::ledger::{ExperimentMeta, FinalLabel, Payload, RunEntry};
use crate::KnowledgeBase;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifySummary {
    /// Records sent for at least one dimension.
    pub classified: usize,
    pub runs: usize,
    pub parse_failures: usize,
    pub errors: usize,
    /// Records left without any parsed run for some dimension of the
    /// production model.
    pub failed: usize,
    /// Records stopped by the gate dimension.
    pub gated_out: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub experiment_id: String,
    pub parsed: usize,
    pub added: usize,
    /// Ids already in the knowledge base or repeated within the batch.
    pub skipped: usize,
    /// Removed by the validity filter.
    pub filtered: usize,
    pub filter: FilterReport,
    pub classification: ClassifySummary,
}

impl KnowledgeBase {
    /// Adds valid records that are not yet present. Returns the added
    /// records, the number skipped as duplicates and the filter report.
    pub fn import_records(&self, corpus: Corpus) -> Result<(Vec<BibRecord>, usize, FilterReport)> {
        let mut seen = BTreeSet::new();
        let parsed = corpus.records.len();
        let fresh: Vec<BibRecord> = {
            let state = self.state();
            corpus
                .records
                .into_iter()
                .filter(|r| !state.records.contains_key(&r.record_id) && seen.insert(r.record_id.clone()))
                .collect()
        };
        let skipped = parsed - fresh.len();
        let (valid, report) = filter_valid(Corpus {
            records: fresh,
            provenance: corpus.provenance,
        });
        self.append_all(valid.records.iter().cloned().map(Payload::Record).collect())?;
        Ok((valid.records, skipped, report))
    }

    /// Parses, filters and stores a batch, then classifies the new records
    /// with the active experiment.
    pub async fn ingest_new_batch(
        &self,
        path: &Path,
        backend: Arc<dyn ChatBackend>,
    ) -> Result<IngestSummary> {
        if self.state().active_meta().is_none() {
            return Err(KbError::NoActiveConfig);
        }
        let corpus = parse_records(path, InputFormat::from_path(path))?;
        self.ingest_corpus(corpus, backend).await
    }

    /// [`KnowledgeBase::ingest_new_batch`] for an already parsed batch.
    pub async fn ingest_corpus(
        &self,
        corpus: Corpus,
        backend: Arc<dyn ChatBackend>,
    ) -> Result<IngestSummary> {
        let meta = self.state().active_meta().cloned().ok_or(KbError::NoActiveConfig)?;
        let parsed = corpus.records.len();
        let (added, skipped, filter) = self.import_records(corpus)?;
        let classification = if added.is_empty() {
            ClassifySummary::default()
        } else {
            self.classify(&meta, &added, backend, true).await?
        };
        tracing::info!(
            experiment = %meta.experiment_id,
            parsed,
            added = added.len(),
            skipped,
            filtered = filter.removed(),
            "batch ingested"
        );
        Ok(IngestSummary {
            experiment_id: meta.experiment_id,
            parsed,
            added: added.len(),
            skipped,
            filtered: filter.removed(),
            filter,
            classification,
        })
    }

    /// Runs an experiment over stored records. `None` means every record.
    /// (dim, model, record) combinations that already have runs are skipped.
    pub async fn run_experiment(
        &self,
        experiment_id: &str,
        record_ids: Option<&[String]>,
        backend: Arc<dyn ChatBackend>,
        gated: bool,
    ) -> Result<ClassifySummary> {
        let (meta, records) = {
            let state = self.state();
            let meta = state.experiment(experiment_id)?.meta.clone();
            let records: Vec<BibRecord> = match record_ids {
                Some(ids) => ids
                    .iter()
                    .map(|id| state.record(id).cloned())
                    .collect::<Result<_>>()?,
                None => state.records.values().cloned().collect(),
            };
            (meta, records)
        };
        self.classify(&meta, &records, backend, gated).await
    }

    /// Classifies `records` on every prompt and model of `meta`. With
    /// `gated`, the gate dimension goes first and only records the first
    /// model labels positive go on to the other dimensions. Runs of every
    /// model are stored; final labels only for the first model.
    async fn classify(
        &self,
        meta: &ExperimentMeta,
        records: &[BibRecord],
        backend: Arc<dyn ChatBackend>,
        gated: bool,
    ) -> Result<ClassifySummary> {
        let taxonomy = self.state().taxonomy.clone();
        let gate_dim = taxonomy.gate().map(|d| d.dim_id);
        let mut prompts = meta.prompts.clone();
        prompts.sort_by_key(|p| (Some(p.dim_id) != gate_dim, p.dim_id));

        let mut summary = ClassifySummary::default();
        let mut classified = BTreeSet::new();
        let mut failed = BTreeSet::new();
        let mut pool: Vec<BibRecord> = records.to_vec();
        for spec in prompts {
            let is_gate = gated && Some(spec.dim_id) == gate_dim;
            let dim = taxonomy.require(spec.dim_id)?.clone();
            for (i, model) in meta.models.iter().enumerate() {
                let todo: Vec<BibRecord> = {
                    let state = self.state();
                    let exp = state.experiment(&meta.experiment_id)?;
                    pool.iter()
                        .filter(|r| exp.runs_of(spec.dim_id, &r.record_id, model).next().is_none())
                        .cloned()
                        .collect()
                };
                if todo.is_empty() {
                    continue;
                }
                let request = BatchRequest::new(&taxonomy, model.clone(), spec.clone(), meta.k)?;
                let runs = classify_batch(backend.clone(), &meta.client, request, &todo).await?;
                summary.runs += runs.len();
                summary.parse_failures += runs.iter().filter(|r| r.is_parse_failure()).count();
                summary.errors += runs.iter().filter(|r| r.is_error()).count();
                classified.extend(todo.iter().map(|r| r.record_id.clone()));

                let mut payloads: Vec<Payload> = Vec::with_capacity(runs.len() + todo.len());
                if i == 0 {
                    let voted = final_labels(&runs)?;
                    failed.extend(voted.exceptions.iter().cloned());
                    for (record_id, labels) in voted.labels {
                        let (labels, subclasses) = match spec.level {
                            LabelLevel::Subclass => (subclass_to_class(&dim, &labels)?, Some(labels)),
                            LabelLevel::Class => (labels, None),
                        };
                        payloads.push(Payload::FinalLabel(FinalLabel {
                            experiment_id: meta.experiment_id.clone(),
                            record_id,
                            dim_id: spec.dim_id,
                            model: model.clone(),
                            labels,
                            subclasses,
                        }));
                    }
                }
                let mut all = runs_payloads(&meta.experiment_id, runs);
                all.append(&mut payloads);
                self.append_all(all)?;
            }
            if is_gate {
                let state = self.state();
                let before = pool.len();
                pool.retain(|r| {
                    state
                        .finals
                        .get(&(r.record_id.clone(), spec.dim_id))
                        .is_some_and(|f| f.experiment_id == meta.experiment_id && f.labels.contains(YES))
                });
                summary.gated_out += before - pool.len();
            }
        }
        summary.classified = classified.len();
        summary.failed = failed.len();
        Ok(summary)
    }
}

fn runs_payloads(experiment_id: &str, runs: Vec<RunResult>) -> Vec<Payload> {
    runs.into_iter()
        .map(|result| {
            Payload::RunResult(RunEntry {
                experiment_id: experiment_id.to_owned(),
                result,
            })
        })
        .collect()
}
