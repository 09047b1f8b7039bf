//! In-memory indexes derived from the ledger.

use std::collections::{BTreeMap, BTreeSet};

use litreview_core::ingest::validity;
use litreview_core::taxonomy::{subclass_to_class, LabelLevel};
use litreview_core::{BibRecord, LabelSet, Taxonomy};
use litreview_llm::{ModelId, RunResult};

use crate::error::{KbError, Result};
use crate::ledger::{ExperimentMeta, FinalLabel, GoldLabel, LedgerEntry, Payload, RunEntry};

/// (dim, record, model, run index)
pub type RunKey = (u32, String, ModelId, u32);

#[derive(Debug, Clone)]
pub struct Experiment {
    pub meta: ExperimentMeta,
    pub runs: BTreeMap<RunKey, RunResult>,
}

impl Experiment {
    /// Runs of one model on one record for `dim_id`, by run index.
    pub fn runs_of<'a>(
        &'a self,
        dim_id: u32,
        record_id: &'a str,
        model: &'a ModelId,
    ) -> impl Iterator<Item = &'a RunResult> + 'a {
        self.runs
            .range((dim_id, record_id.to_owned(), model.clone(), 0)..)
            .take_while(move |((d, r, m, _), _)| *d == dim_id && r == record_id && m == model)
            .map(|(_, run)| run)
    }

    /// Records with at least one run for `dim_id`.
    pub fn records_for(&self, dim_id: u32) -> BTreeSet<&str> {
        self.runs
            .keys()
            .filter(|(d, ..)| *d == dim_id)
            .map(|(_, r, ..)| r.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldEntry {
    pub seq: u64,
    pub gold: GoldLabel,
}

#[derive(Debug, Clone)]
pub struct State {
    pub taxonomy: Taxonomy,
    pub records: BTreeMap<String, BibRecord>,
    pub experiments: BTreeMap<String, Experiment>,
    /// Full history per (record, dim); the last entry is active.
    pub gold: BTreeMap<(String, u32), Vec<GoldEntry>>,
    /// Latest final labels per (record, dim).
    pub finals: BTreeMap<(String, u32), FinalLabel>,
    /// Bumped on every gold label for the dimension.
    pub report_versions: BTreeMap<u32, u64>,
    pub active: Option<String>,
    pub entries: u64,
    pub last_seq: u64,
}

/// What an uncommitted batch adds, so later items in the batch can be
/// checked against earlier ones.
#[derive(Debug, Default)]
pub(crate) struct Pending {
    records: BTreeSet<String>,
    runs: BTreeSet<(String, RunKey)>,
}

impl State {
    pub fn new(taxonomy: Taxonomy) -> Self {
        State {
            taxonomy,
            records: BTreeMap::new(),
            experiments: BTreeMap::new(),
            gold: BTreeMap::new(),
            finals: BTreeMap::new(),
            report_versions: BTreeMap::new(),
            active: None,
            entries: 0,
            last_seq: 0,
        }
    }

    pub fn experiment(&self, id: &str) -> Result<&Experiment> {
        self.experiments
            .get(id)
            .ok_or_else(|| KbError::UnknownExperiment(id.to_owned()))
    }

    pub fn record(&self, id: &str) -> Result<&BibRecord> {
        self.records
            .get(id)
            .ok_or_else(|| KbError::UnknownRecord(id.to_owned()))
    }

    pub fn active_gold(&self, record_id: &str, dim_id: u32) -> Option<&GoldEntry> {
        self.gold
            .get(&(record_id.to_owned(), dim_id))
            .and_then(|h| h.last())
    }

    pub fn report_version(&self, dim_id: u32) -> u64 {
        self.report_versions.get(&dim_id).copied().unwrap_or(0)
    }

    pub fn active_meta(&self) -> Option<&ExperimentMeta> {
        self.active
            .as_ref()
            .and_then(|id| self.experiments.get(id))
            .map(|e| &e.meta)
    }

    /// Class-level labels of a run, or `None` if it produced none.
    pub fn class_labels(&self, meta: &ExperimentMeta, run: &RunResult) -> Option<LabelSet> {
        let labels = run.labels()?;
        match meta.prompt_for(run.dim_id).map(|p| p.level) {
            Some(LabelLevel::Subclass) => {
                let dim = self.taxonomy.dimension(run.dim_id)?;
                subclass_to_class(dim, labels).ok()
            }
            _ => Some(labels.clone()),
        }
    }

    pub(crate) fn check(&self, payload: &Payload, pending: &Pending) -> Result<()> {
        match payload {
            Payload::Record(r) => {
                if r.record_id.trim().is_empty() {
                    return Err(KbError::schema("record", "empty record_id"));
                }
                if self.records.contains_key(&r.record_id) || pending.records.contains(&r.record_id) {
                    return Err(KbError::Conflict(format!(
                        "record `{}` already exists",
                        r.record_id
                    )));
                }
                validity(r).map_err(|reason| {
                    KbError::schema("record", format!("`{}`: {reason:?}", r.record_id))
                })
            }
            Payload::ExperimentMeta(m) => self.check_meta(m),
            Payload::RunResult(e) => self.check_run(e, pending),
            Payload::GoldLabel(g) => {
                self.require_record(&g.record_id, pending)?;
                if g.annotator.trim().is_empty() {
                    return Err(KbError::schema("gold_label", "empty annotator"));
                }
                if g.labels.is_empty() {
                    return Err(KbError::schema("gold_label", "empty label set"));
                }
                self.taxonomy.require(g.dim_id)?.validate_labels(&g.labels)?;
                Ok(())
            }
            Payload::FinalLabel(f) => {
                let exp = self.experiment(&f.experiment_id)?;
                self.require_record(&f.record_id, pending)?;
                if !exp.meta.models.contains(&f.model) {
                    return Err(KbError::schema(
                        "final_label",
                        format!("model {} is not part of the experiment", f.model),
                    ));
                }
                let dim = self.taxonomy.require(f.dim_id)?;
                dim.validate_labels(&f.labels)?;
                if let Some(sub) = &f.subclasses {
                    dim.subclass_dimension()?.validate_labels(sub)?;
                }
                Ok(())
            }
        }
    }

    fn require_record(&self, id: &str, pending: &Pending) -> Result<()> {
        if self.records.contains_key(id) || pending.records.contains(id) {
            Ok(())
        } else {
            Err(KbError::UnknownRecord(id.to_owned()))
        }
    }

    fn check_meta(&self, m: &ExperimentMeta) -> Result<()> {
        let bad = |msg: String| Err(KbError::schema("experiment_meta", msg));
        if m.experiment_id.trim().is_empty() {
            return bad("empty experiment_id".into());
        }
        if m.models.is_empty() {
            return bad("no models".into());
        }
        if m.models.iter().collect::<BTreeSet<_>>().len() != m.models.len() {
            return bad("duplicate model".into());
        }
        if m.k == 0 {
            return bad("k must be at least 1".into());
        }
        if m.prompts.is_empty() {
            return bad("no prompts".into());
        }
        let mut dims = BTreeSet::new();
        for p in &m.prompts {
            if !dims.insert(p.dim_id) {
                return bad(format!("two prompts for dimension {}", p.dim_id));
            }
            self.taxonomy.response_dimension(p)?;
            if p.template_text.trim().is_empty() {
                return bad(format!("prompt `{}` has an empty template", p.prompt_id));
            }
        }
        m.client
            .validate()
            .map_err(|e| KbError::schema("experiment_meta", e.to_string()))?;
        if let Some(old) = self.experiments.get(&m.experiment_id) {
            if old.meta.models != m.models || old.meta.prompts != m.prompts || old.meta.k != m.k {
                return Err(KbError::Conflict(format!(
                    "experiment `{}` exists with different models, prompts or k",
                    m.experiment_id
                )));
            }
        }
        Ok(())
    }

    fn check_run(&self, e: &RunEntry, pending: &Pending) -> Result<()> {
        let exp = self.experiment(&e.experiment_id)?;
        let r = &e.result;
        self.require_record(&r.record_id, pending)?;
        let bad = |msg: String| Err(KbError::schema("run_result", msg));
        if !exp.meta.models.contains(&r.model) {
            return bad(format!("model {} is not part of the experiment", r.model));
        }
        if r.run_index == 0 || r.run_index > exp.meta.k {
            return bad(format!("run index {} outside 1..={}", r.run_index, exp.meta.k));
        }
        let Some(spec) = exp.meta.prompt_for(r.dim_id) else {
            return bad(format!("experiment has no prompt for dimension {}", r.dim_id));
        };
        if spec.prompt_id != r.prompt_id {
            return bad(format!("prompt `{}` is not the experiment's prompt", r.prompt_id));
        }
        if let Some(labels) = r.labels() {
            self.taxonomy.response_dimension(spec)?.validate_labels(labels)?;
        }
        let key = (r.dim_id, r.record_id.clone(), r.model.clone(), r.run_index);
        if exp.runs.contains_key(&key) || pending.runs.contains(&(e.experiment_id.clone(), key)) {
            return Err(KbError::Conflict(format!(
                "run {} of {} on `{}` is already recorded",
                r.run_index, r.model, r.record_id
            )));
        }
        Ok(())
    }

    pub(crate) fn note_pending(pending: &mut Pending, payload: &Payload) {
        match payload {
            Payload::Record(r) => {
                pending.records.insert(r.record_id.clone());
            }
            Payload::RunResult(e) => {
                let r = &e.result;
                pending.runs.insert((
                    e.experiment_id.clone(),
                    (r.dim_id, r.record_id.clone(), r.model.clone(), r.run_index),
                ));
            }
            _ => {}
        }
    }

    /// Applies an entry. Entries read back from disk are re-checked.
    pub fn replay(&mut self, entry: LedgerEntry) -> Result<()> {
        if entry.seq <= self.last_seq {
            return Err(KbError::schema("ledger", format!("sequence {} out of order", entry.seq)));
        }
        self.check(&entry.payload, &Pending::default())?;
        self.apply(entry);
        Ok(())
    }

    pub(crate) fn apply(&mut self, entry: LedgerEntry) {
        self.entries += 1;
        self.last_seq = entry.seq;
        match entry.payload {
            Payload::Record(r) => {
                self.records.insert(r.record_id.clone(), r);
            }
            Payload::ExperimentMeta(m) => {
                let id = m.experiment_id.clone();
                if m.active {
                    for e in self.experiments.values_mut() {
                        e.meta.active = false;
                    }
                    self.active = Some(id.clone());
                } else if self.active.as_deref() == Some(id.as_str()) {
                    self.active = None;
                }
                match self.experiments.get_mut(&id) {
                    Some(e) => e.meta = m,
                    None => {
                        self.experiments.insert(
                            id,
                            Experiment {
                                meta: m,
                                runs: BTreeMap::new(),
                            },
                        );
                    }
                }
            }
            Payload::RunResult(e) => {
                let r = e.result;
                let key = (r.dim_id, r.record_id.clone(), r.model.clone(), r.run_index);
                if let Some(exp) = self.experiments.get_mut(&e.experiment_id) {
                    exp.runs.insert(key, r);
                }
            }
            Payload::GoldLabel(g) => {
                *self.report_versions.entry(g.dim_id).or_default() += 1;
                self.gold
                    .entry((g.record_id.clone(), g.dim_id))
                    .or_default()
                    .push(GoldEntry {
                        seq: entry.seq,
                        gold: g,
                    });
            }
            Payload::FinalLabel(f) => {
                self.finals.insert((f.record_id.clone(), f.dim_id), f);
            }
        }
    }
}
