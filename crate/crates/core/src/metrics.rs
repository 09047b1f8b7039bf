//! Classification quality and self-consistency statistics.
//!
//! A run that failed to parse is represented by an empty label set, so it
//! scores as a complete miss and breaks agreement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Fraction, Real};
use crate::LabelSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no samples")]
    Empty,
    #[error("record {record_id}: consistency needs at least two runs, got {k}")]
    TooFewRuns { record_id: String, k: usize },
    #[error("record {record_id}: binary metrics need single labels")]
    NotSingleton { record_id: String },
    #[error("record {0} has no gold label")]
    MissingGold(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSample {
    pub record_id: String,
    pub gold: LabelSet,
    pub predicted: LabelSet,
}

impl EvalSample {
    pub fn new(record_id: impl Into<String>, gold: LabelSet, predicted: LabelSet) -> Self {
        EvalSample {
            record_id: record_id.into(),
            gold,
            predicted,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    /// `2TP / (2TP + FP + FN)`; defined as 1 when there is nothing to count.
    pub fn f1<T: Fraction>(&self) -> T {
        let den = 2 * self.tp + self.fp + self.fn_;
        if den == 0 {
            T::one()
        } else {
            T::ratio(2 * self.tp, den)
        }
    }
}

/// Label sets of one record across replicated runs, in run order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTriple {
    pub record_id: String,
    pub runs: Vec<LabelSet>,
}

impl RunTriple {
    pub fn new(record_id: impl Into<String>, runs: Vec<LabelSet>) -> Self {
        RunTriple {
            record_id: record_id.into(),
            runs,
        }
    }

    pub fn all_equal(&self) -> bool {
        self.runs.windows(2).all(|w| w[0] == w[1])
    }
}

/// Jaccard index with `J(∅, ∅) = 1`.
pub fn jaccard<T: Fraction>(a: &LabelSet, b: &LabelSet) -> T {
    let union = a.union_len(b);
    if union == 0 {
        T::one()
    } else {
        T::ratio(a.intersection_len(b), union)
    }
}

/// Per-sample F1, `2|a∩b| / (|a|+|b|)`, with `F1(∅, ∅) = 1`.
pub fn sample_f1<T: Fraction>(a: &LabelSet, b: &LabelSet) -> T {
    let den = a.len() + b.len();
    if den == 0 {
        T::one()
    } else {
        T::ratio(2 * a.intersection_len(b), den)
    }
}

/// True unless the prediction misses gold completely. Two empty sets
/// overlap by convention, matching `J(∅, ∅) = 1`.
pub fn overlaps(gold: &LabelSet, predicted: &LabelSet) -> bool {
    (gold.is_empty() && predicted.is_empty()) || gold.intersection_len(predicted) > 0
}

fn non_empty<X>(xs: &[X]) -> Result<(), MetricsError> {
    if xs.is_empty() {
        Err(MetricsError::Empty)
    } else {
        Ok(())
    }
}

fn check_binary(s: &EvalSample) -> Result<(), MetricsError> {
    // an empty prediction is a parse failure and simply counts as wrong
    if s.gold.len() != 1 || s.predicted.len() > 1 {
        return Err(MetricsError::NotSingleton {
            record_id: s.record_id.clone(),
        });
    }
    Ok(())
}

pub fn binary_accuracy<T: Fraction>(samples: &[EvalSample]) -> Result<T, MetricsError> {
    non_empty(samples)?;
    let mut hits = 0;
    for s in samples {
        check_binary(s)?;
        if s.gold == s.predicted {
            hits += 1;
        }
    }
    Ok(T::ratio(hits, samples.len()))
}

pub fn binary_confusion(
    samples: &[EvalSample],
    positive: &str,
) -> Result<ConfusionCounts, MetricsError> {
    let mut c = ConfusionCounts::default();
    for s in samples {
        check_binary(s)?;
        match (s.gold.contains(positive), s.predicted.contains(positive)) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(c)
}

/// F1 of the `positive` class; 0 when there are no predicted or no gold
/// positives.
pub fn binary_f1<T: Fraction>(samples: &[EvalSample], positive: &str) -> Result<T, MetricsError> {
    non_empty(samples)?;
    let c = binary_confusion(samples, positive)?;
    if c.tp + c.fp == 0 || c.tp + c.fn_ == 0 {
        return Ok(T::zero());
    }
    // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN)
    Ok(T::ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_))
}

fn check_runs(triples: &[RunTriple]) -> Result<(), MetricsError> {
    non_empty(triples)?;
    if let Some(t) = triples.iter().find(|t| t.runs.len() < 2) {
        return Err(MetricsError::TooFewRuns {
            record_id: t.record_id.clone(),
            k: t.runs.len(),
        });
    }
    Ok(())
}

/// Fraction of records given the same label in every run.
pub fn binary_self_consistency<T: Fraction>(triples: &[RunTriple]) -> Result<T, MetricsError> {
    check_runs(triples)?;
    let same = triples.iter().filter(|t| t.all_equal()).count();
    Ok(T::ratio(same, triples.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelReport<T> {
    pub mean_jaccard: T,
    pub lenient_accuracy: T,
    pub sample_f1: T,
    pub micro_f1: T,
}

pub fn micro_counts(samples: &[EvalSample]) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for s in samples {
        let both = s.gold.intersection_len(&s.predicted);
        c.tp += both;
        c.fp += s.predicted.len() - both;
        c.fn_ += s.gold.len() - both;
    }
    c
}

pub fn multilabel_report<T: Fraction>(
    samples: &[EvalSample],
) -> Result<MultiLabelReport<T>, MetricsError> {
    non_empty(samples)?;
    let n = T::from_count(samples.len());
    let mut jac = T::zero();
    let mut f1 = T::zero();
    let mut lenient = 0;
    for s in samples {
        jac = jac + jaccard::<T>(&s.gold, &s.predicted);
        f1 = f1 + sample_f1::<T>(&s.gold, &s.predicted);
        if overlaps(&s.gold, &s.predicted) {
            lenient += 1;
        }
    }
    Ok(MultiLabelReport {
        mean_jaccard: jac / n,
        lenient_accuracy: T::ratio(lenient, samples.len()),
        sample_f1: f1 / n,
        micro_f1: micro_counts(samples).f1(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport<T> {
    pub full_agreement: T,
    pub pairwise_jaccard: T,
}

pub fn consistency_report<T: Fraction>(
    triples: &[RunTriple],
) -> Result<ConsistencyReport<T>, MetricsError> {
    check_runs(triples)?;
    let mut total = T::zero();
    for t in triples {
        let k = t.runs.len();
        let mut sum = T::zero();
        for a in 0..k {
            for b in a + 1..k {
                sum = sum + jaccard::<T>(&t.runs[a], &t.runs[b]);
            }
        }
        total = total + sum / T::from_count(k * (k - 1) / 2);
    }
    Ok(ConsistencyReport {
        full_agreement: binary_self_consistency(triples)?,
        pairwise_jaccard: total / T::from_count(triples.len()),
    })
}

/// Per record and model, how many runs missed gold completely.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorHeatmap {
    pub models: Vec<String>,
    pub records: Vec<String>,
    /// `cells[r][m]`; `None` when model `m` has no runs for record `r`.
    pub cells: Vec<Vec<Option<usize>>>,
    pub record_totals: Vec<usize>,
}

impl ErrorHeatmap {
    pub fn cell(&self, record_id: &str, model: &str) -> Option<usize> {
        let r = self.records.iter().position(|x| x == record_id)?;
        let m = self.models.iter().position(|x| x == model)?;
        self.cells[r][m]
    }

    pub fn total(&self, record_id: &str) -> Option<usize> {
        let r = self.records.iter().position(|x| x == record_id)?;
        Some(self.record_totals[r])
    }

    /// Rows are records, columns models, plus a trailing `total` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("record_id");
        for m in &self.models {
            out.push(',');
            out.push_str(&csv_field(m));
        }
        out.push_str(",total\n");
        for (r, id) in self.records.iter().enumerate() {
            out.push_str(&csv_field(id));
            for c in &self.cells[r] {
                out.push(',');
                if let Some(v) = c {
                    let _ = write!(out, "{v}");
                }
            }
            let _ = writeln!(out, ",{}", self.record_totals[r]);
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn error_heatmap(
    gold: &BTreeMap<String, LabelSet>,
    runs_by_model: &BTreeMap<String, Vec<RunTriple>>,
) -> Result<ErrorHeatmap, MetricsError> {
    let records: BTreeSet<&str> = runs_by_model
        .values()
        .flatten()
        .map(|t| t.record_id.as_str())
        .collect();
    if let Some(missing) = records.iter().find(|r| !gold.contains_key(**r)) {
        return Err(MetricsError::MissingGold((*missing).to_owned()));
    }
    let models: Vec<String> = runs_by_model.keys().cloned().collect();
    let lookup: Vec<BTreeMap<&str, &RunTriple>> = runs_by_model
        .values()
        .map(|ts| ts.iter().map(|t| (t.record_id.as_str(), t)).collect())
        .collect();
    let mut cells = Vec::with_capacity(records.len());
    let mut totals = Vec::with_capacity(records.len());
    for r in &records {
        let g = &gold[*r];
        let row: Vec<Option<usize>> = lookup
            .iter()
            .map(|by_id| {
                by_id
                    .get(r)
                    .map(|t| t.runs.iter().filter(|run| !overlaps(g, run)).count())
            })
            .collect();
        totals.push(row.iter().flatten().sum());
        cells.push(row);
    }
    Ok(ErrorHeatmap {
        models,
        records: records.into_iter().map(str::to_owned).collect(),
        cells,
        record_totals: totals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd<T> {
    pub mean: T,
    pub std: T,
}

/// Mean and population standard deviation.
pub fn aggregate_runs<T: Real>(values: &[T]) -> Result<MeanStd<T>, MetricsError> {
    non_empty(values)?;
    let n = T::from_count(values.len());
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / n;
    let var = values
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean))
        / n;
    Ok(MeanStd {
        mean,
        std: var.sqrt(),
    })
}

/// Named statistics, each aggregated across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    /// Number of evaluated records.
    pub n: usize,
    /// Replication count k.
    pub runs: usize,
    pub metrics: BTreeMap<String, MeanStd<T>>,
}

fn run_samples(
    gold: &BTreeMap<String, LabelSet>,
    triples: &[RunTriple],
    run: usize,
) -> Result<Vec<EvalSample>, MetricsError> {
    triples
        .iter()
        .map(|t| {
            let g = gold
                .get(&t.record_id)
                .ok_or_else(|| MetricsError::MissingGold(t.record_id.clone()))?;
            Ok(EvalSample::new(
                t.record_id.clone(),
                g.clone(),
                t.runs.get(run).cloned().unwrap_or_default(),
            ))
        })
        .collect()
}

fn replication(triples: &[RunTriple]) -> usize {
    triples.iter().map(|t| t.runs.len()).max().unwrap_or(0)
}

fn exact<T: Real>(v: T) -> MeanStd<T> {
    MeanStd {
        mean: v,
        std: T::zero(),
    }
}

/// Accuracy metrics per run (mean ± std across runs) plus consistency
/// across runs for a multi-label dimension.
pub fn multilabel_run_report<T: Real>(
    gold: &BTreeMap<String, LabelSet>,
    triples: &[RunTriple],
) -> Result<MetricsReport<T>, MetricsError> {
    non_empty(triples)?;
    let k = replication(triples);
    let mut per_run: Vec<MultiLabelReport<T>> = Vec::with_capacity(k);
    for run in 0..k {
        per_run.push(multilabel_report(&run_samples(gold, triples, run)?)?);
    }
    let mut metrics = BTreeMap::new();
    let series: [(&str, fn(&MultiLabelReport<T>) -> T); 4] = [
        ("mean_jaccard", |r| r.mean_jaccard),
        ("lenient_accuracy", |r| r.lenient_accuracy),
        ("sample_f1", |r| r.sample_f1),
        ("micro_f1", |r| r.micro_f1),
    ];
    for (name, get) in series {
        let values: Vec<T> = per_run.iter().map(get).collect();
        metrics.insert(name.to_owned(), aggregate_runs(&values)?);
    }
    if k >= 2 {
        let c = consistency_report::<T>(triples)?;
        metrics.insert("full_agreement".into(), exact(c.full_agreement));
        metrics.insert("pairwise_jaccard".into(), exact(c.pairwise_jaccard));
    }
    Ok(MetricsReport {
        n: triples.len(),
        runs: k,
        metrics,
    })
}

/// Accuracy and F1 of `positive` per run, plus self-consistency.
pub fn binary_run_report<T: Real>(
    gold: &BTreeMap<String, LabelSet>,
    triples: &[RunTriple],
    positive: &str,
) -> Result<MetricsReport<T>, MetricsError> {
    non_empty(triples)?;
    let k = replication(triples);
    let mut acc = Vec::with_capacity(k);
    let mut f1 = Vec::with_capacity(k);
    for run in 0..k {
        let samples = run_samples(gold, triples, run)?;
        acc.push(binary_accuracy::<T>(&samples)?);
        f1.push(binary_f1::<T>(&samples, positive)?);
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("accuracy".to_owned(), aggregate_runs(&acc)?);
    metrics.insert("f1".to_owned(), aggregate_runs(&f1)?);
    if k >= 2 {
        metrics.insert(
            "self_consistency".into(),
            exact(binary_self_consistency::<T>(triples)?),
        );
    }
    Ok(MetricsReport {
        n: triples.len(),
        runs: k,
        metrics,
    })
}
