use std::collections::BTreeMap;

use litreview_core::LabelSet;
use serde::{Deserialize, Serialize};

use crate::{LlmError, RunResult};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalLabels {
    pub labels: BTreeMap<String, LabelSet>,
    /// Records without a single parsed run.
    pub exceptions: Vec<String>,
}

/// Collapses replicated runs of one model and one prompt into a label set
/// per record.
///
/// With k runs for a record (failed runs included), a label is kept when
/// more than k/2 runs carry it. At exactly k/2 it is kept if run 1 carries
/// it. If nothing survives the vote, the earliest parsed run is used as is.
pub fn final_labels(runs: &[RunResult]) -> Result<FinalLabels, LlmError> {
    if let Some(first) = runs.first() {
        if runs.iter().any(|r| r.model != first.model) {
            return Err(LlmError::MixedRuns("models"));
        }
        if runs.iter().any(|r| r.prompt_id != first.prompt_id) {
            return Err(LlmError::MixedRuns("prompts"));
        }
    }
    let mut by_record: BTreeMap<&str, Vec<&RunResult>> = BTreeMap::new();
    for r in runs {
        by_record.entry(&r.record_id).or_default().push(r);
    }
    let mut out = FinalLabels::default();
    for (id, mut rs) in by_record {
        rs.sort_by_key(|r| r.run_index);
        let parsed: Vec<(u32, &LabelSet)> =
            rs.iter().filter_map(|r| Some((r.run_index, r.labels()?))).collect();
        let Some(&(_, earliest)) = parsed.first() else {
            out.exceptions.push(id.to_owned());
            continue;
        };
        let k = rs.len();
        let run1 = parsed.iter().find(|(i, _)| *i == 1).map(|(_, l)| *l);
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for (_, l) in &parsed {
            for label in l.iter() {
                *counts.entry(label).or_default() += 1;
            }
        }
        let mut kept: LabelSet = counts
            .into_iter()
            .filter(|&(label, c)| {
                2 * c > k || (2 * c == k && run1.is_some_and(|l| l.contains(label)))
            })
            .map(|(label, _)| label)
            .collect();
        if kept.is_empty() {
            kept = earliest.clone();
        }
        out.labels.insert(id.to_owned(), kept);
    }
    Ok(out)
}
