//! Expert review workflow: disagreement queue, gold labels, metrics.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use litreview_core::metrics::{binary_run_report, error_heatmap, multilabel_run_report, ErrorHeatmap, RunTriple};
use litreview_core::taxonomy::YES;
use litreview_core::{LabelSet, MetricsReport};
use litreview_llm::{final_labels, RunResult};
use serde::{Deserialize, Serialize};

use crate::error::{KbError, Result};
use crate::state::{Experiment, State};
use crate::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldSubmission {
    pub record_id: String,
    pub dim_id: u32,
    pub labels: LabelSet,
    pub annotator: String,
    /// Defaults to the time of writing.
    #[serde(default)]
    pub entered_at: Option<DateTime<Utc>>,
    /// Ledger sequence of the gold label this one replaces, 0 for none.
    /// Left out, the label is written unconditionally.
    #[serde(default)]
    pub supersedes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAck {
    pub seq: u64,
    pub record_id: String,
    pub dim_id: u32,
    pub labels: LabelSet,
    /// Sequence of the previously active gold label.
    pub superseded: Option<u64>,
    pub report_version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelVotes {
    /// Majority vote over the runs; `None` when no run parsed.
    pub final_labels: Option<LabelSet>,
    /// Class-level labels by run index; `None` for failed runs.
    pub runs: Vec<Option<LabelSet>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldView {
    pub seq: u64,
    pub labels: LabelSet,
    pub annotator: String,
    pub entered_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueItem {
    pub record_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
    pub year: Option<i32>,
    /// Distinct label sets across all runs of all models. A failed run
    /// counts as its own set.
    pub distinct_label_sets: usize,
    pub models: BTreeMap<String, ModelVotes>,
    pub gold: Option<GoldView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Queue {
    pub experiment_id: String,
    pub dim_id: u32,
    pub report_version: u64,
    pub items: Vec<QueueItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsView {
    pub experiment_id: String,
    pub dim_id: u32,
    pub report_version: u64,
    /// Records with runs for the dimension.
    pub records: usize,
    /// Of those, records with an active gold label.
    pub with_gold: usize,
    pub models: BTreeMap<String, MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapView {
    pub dim_id: u32,
    pub report_version: u64,
    pub heatmap: ErrorHeatmap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmaps {
    pub experiment_id: String,
    pub heatmaps: Vec<HeatmapView>,
}

/// Per model, the class-level runs of every record that has runs for the
/// dimension, in record order. Failed and missing runs are `None`.
fn collect_runs(
    state: &State,
    exp: &Experiment,
    dim_id: u32,
) -> BTreeMap<String, BTreeMap<String, Vec<Option<LabelSet>>>> {
    let records = exp.records_for(dim_id);
    let k = exp.meta.k as usize;
    let mut out = BTreeMap::new();
    for model in &exp.meta.models {
        let mut per_record = BTreeMap::new();
        for r in &records {
            let mut runs = vec![None; k];
            for run in exp.runs_of(dim_id, r, model) {
                runs[run.run_index as usize - 1] = state.class_labels(&exp.meta, run);
            }
            if exp.runs_of(dim_id, r, model).next().is_some() {
                per_record.insert((*r).to_owned(), runs);
            }
        }
        out.insert(model.to_string(), per_record);
    }
    out
}

fn model_final(state: &State, exp: &Experiment, dim_id: u32, record_id: &str, model: &litreview_llm::ModelId) -> Option<LabelSet> {
    let runs: Vec<RunResult> = exp.runs_of(dim_id, record_id, model).cloned().collect();
    let voted = final_labels(&runs).ok()?.labels.remove(record_id)?;
    let mut carrier = runs.first()?.clone();
    carrier.outcome = litreview_llm::RunOutcome::Parsed { labels: voted };
    state.class_labels(&exp.meta, &carrier)
}

fn require_dim(state: &State, exp: &Experiment, dim_id: u32) -> Result<()> {
    state.taxonomy.require(dim_id)?;
    if exp.meta.prompt_for(dim_id).is_none() {
        return Err(KbError::Query(format!(
            "experiment `{}` has no prompt for dimension {dim_id}",
            exp.meta.experiment_id
        )));
    }
    Ok(())
}

fn active_gold_map(state: &State, dim_id: u32) -> BTreeMap<String, LabelSet> {
    state
        .gold
        .iter()
        .filter(|((_, d), _)| *d == dim_id)
        .filter_map(|((r, _), h)| Some((r.clone(), h.last()?.gold.labels.clone())))
        .collect()
}

fn triples(runs: &BTreeMap<String, Vec<Option<LabelSet>>>, keep: impl Fn(&str) -> bool) -> Vec<RunTriple> {
    runs.iter()
        .filter(|(r, _)| keep(r))
        .map(|(r, rs)| RunTriple::new(r.clone(), rs.iter().map(|l| l.clone().unwrap_or_default()).collect()))
        .collect()
}

impl KnowledgeBase {
    /// Records whose runs disagree, across models or across replications,
    /// or that have no gold label yet. Most distinct label sets first.
    pub fn disagreement_queue(&self, experiment_id: &str, dim_id: u32) -> Result<Queue> {
        let state = self.state();
        let exp = state.experiment(experiment_id)?;
        require_dim(&state, exp, dim_id)?;
        if exp.meta.models.len() < 2 && exp.meta.k < 2 {
            return Err(KbError::NothingToCompare(experiment_id.to_owned()));
        }
        let runs = collect_runs(&state, exp, dim_id);
        let mut items = Vec::new();
        for record_id in exp.records_for(dim_id) {
            let mut distinct = BTreeSet::new();
            let mut models = BTreeMap::new();
            for model in &exp.meta.models {
                let Some(rs) = runs[&model.to_string()].get(record_id) else {
                    continue;
                };
                distinct.extend(rs.iter().cloned());
                models.insert(
                    model.to_string(),
                    ModelVotes {
                        final_labels: model_final(&state, exp, dim_id, record_id, model),
                        runs: rs.clone(),
                    },
                );
            }
            let gold = state.active_gold(record_id, dim_id).map(|g| GoldView {
                seq: g.seq,
                labels: g.gold.labels.clone(),
                annotator: g.gold.annotator.clone(),
                entered_at: g.gold.entered_at,
            });
            if distinct.len() <= 1 && gold.is_some() {
                continue;
            }
            let record = state.record(record_id)?;
            items.push(QueueItem {
                record_id: record_id.to_owned(),
                title: record.title.clone(),
                abstract_text: record.abstract_text.clone(),
                year: record.year,
                distinct_label_sets: distinct.len(),
                models,
                gold,
            });
        }
        items.sort_by(|a, b| {
            b.distinct_label_sets
                .cmp(&a.distinct_label_sets)
                .then_with(|| a.record_id.cmp(&b.record_id))
        });
        Ok(Queue {
            experiment_id: experiment_id.to_owned(),
            dim_id,
            report_version: state.report_version(dim_id),
            items,
        })
    }

    /// Accuracy and consistency per model against the active gold labels.
    /// Records without gold are left out; a model without any gold-labelled
    /// record has no report.
    pub fn metrics(&self, experiment_id: &str, dim_id: u32) -> Result<MetricsView> {
        let state = self.state();
        let exp = state.experiment(experiment_id)?;
        require_dim(&state, exp, dim_id)?;
        let dim = state.taxonomy.require(dim_id)?;
        let gold = active_gold_map(&state, dim_id);
        let records = exp.records_for(dim_id);
        let mut models = BTreeMap::new();
        for (model, runs) in collect_runs(&state, exp, dim_id) {
            let ts = triples(&runs, |r| gold.contains_key(r));
            if ts.is_empty() {
                continue;
            }
            let report = if dim.is_binary() {
                binary_run_report(&gold, &ts, YES)?
            } else {
                multilabel_run_report(&gold, &ts)?
            };
            models.insert(model, report);
        }
        Ok(MetricsView {
            experiment_id: experiment_id.to_owned(),
            dim_id,
            report_version: state.report_version(dim_id),
            records: records.len(),
            with_gold: records.iter().filter(|r| gold.contains_key(**r)).count(),
            models,
        })
    }

    /// Per-record, per-model count of runs that share no category with the
    /// gold label, for one dimension or every dimension of the experiment.
    pub fn heatmap(&self, experiment_id: &str, dim_id: Option<u32>) -> Result<Heatmaps> {
        let state = self.state();
        let exp = state.experiment(experiment_id)?;
        let dims: Vec<u32> = match dim_id {
            Some(d) => {
                require_dim(&state, exp, d)?;
                vec![d]
            }
            None => {
                let mut ds: Vec<u32> = exp.meta.prompts.iter().map(|p| p.dim_id).collect();
                ds.sort_unstable();
                ds
            }
        };
        let mut heatmaps = Vec::new();
        for d in dims {
            let gold = active_gold_map(&state, d);
            let by_model: BTreeMap<String, Vec<RunTriple>> = collect_runs(&state, exp, d)
                .into_iter()
                .map(|(m, runs)| (m, triples(&runs, |r| gold.contains_key(r))))
                .collect();
            heatmaps.push(HeatmapView {
                dim_id: d,
                report_version: state.report_version(d),
                heatmap: error_heatmap(&gold, &by_model)?,
            });
        }
        Ok(Heatmaps {
            experiment_id: experiment_id.to_owned(),
            heatmaps,
        })
    }
}
