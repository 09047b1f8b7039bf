use std::collections::BTreeMap;

use litreview_core::{BibRecord, LabelSet};
use serde::{Deserialize, Serialize};

use crate::error::{KbError, Result};
use crate::state::State;
use crate::KnowledgeBase;

pub const DEFAULT_LIMIT: usize = 50;
pub const MAX_LIMIT: usize = 1000;

/// Conjunctive record filter. At least one of label, year or text
/// predicates must be present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    /// Each dimension's final labels must contain all listed categories.
    #[serde(default)]
    pub labels: BTreeMap<u32, LabelSet>,
    #[serde(default)]
    pub year_min: Option<i32>,
    #[serde(default)]
    pub year_max: Option<i32>,
    /// Case-insensitive substrings; each must occur in the title or the abstract.
    #[serde(default)]
    pub text: Vec<String>,
    #[serde(default)]
    pub offset: usize,
    #[serde(default = "default_limit")]
    pub limit: usize,
}

fn default_limit() -> usize {
    DEFAULT_LIMIT
}

impl Default for Query {
    fn default() -> Self {
        Query {
            labels: BTreeMap::new(),
            year_min: None,
            year_max: None,
            text: Vec::new(),
            offset: 0,
            limit: DEFAULT_LIMIT,
        }
    }
}

impl Query {
    pub fn with_label(mut self, dim_id: u32, cat: &str) -> Self {
        self.labels.entry(dim_id).or_default().insert(cat);
        self
    }

    pub fn years(mut self, min: Option<i32>, max: Option<i32>) -> Self {
        self.year_min = min;
        self.year_max = max;
        self
    }

    pub fn with_text(mut self, term: impl Into<String>) -> Self {
        self.text.push(term.into());
        self
    }

    pub fn page(mut self, offset: usize, limit: usize) -> Self {
        self.offset = offset;
        self.limit = limit;
        self
    }

    fn validate(&self, state: &State) -> Result<()> {
        if self.labels.is_empty()
            && self.year_min.is_none()
            && self.year_max.is_none()
            && self.text.is_empty()
        {
            return Err(KbError::Query("at least one predicate is required".into()));
        }
        for (dim_id, cats) in &self.labels {
            if cats.is_empty() {
                return Err(KbError::Query(format!("empty label predicate for dimension {dim_id}")));
            }
            state.taxonomy.require(*dim_id)?.validate_labels(cats)?;
        }
        if let (Some(lo), Some(hi)) = (self.year_min, self.year_max) {
            if lo > hi {
                return Err(KbError::Query(format!("year range {lo}..{hi} is empty")));
            }
        }
        if self.text.iter().any(|t| t.trim().is_empty()) {
            return Err(KbError::Query("empty text term".into()));
        }
        if self.limit == 0 || self.limit > MAX_LIMIT {
            return Err(KbError::Query(format!("limit must be within 1..={MAX_LIMIT}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordHit {
    pub record: BibRecord,
    /// Final labels by dimension.
    pub labels: BTreeMap<u32, LabelSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page<T> {
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub items: Vec<T>,
}

pub(crate) fn final_labels_of(state: &State, record_id: &str) -> BTreeMap<u32, LabelSet> {
    state
        .finals
        .range((record_id.to_owned(), 0)..=(record_id.to_owned(), u32::MAX))
        .map(|((_, d), f)| (*d, f.labels.clone()))
        .collect()
}

/// Whether `record` (with its final labels) satisfies every predicate.
pub fn matches(q: &Query, record: &BibRecord, labels: &BTreeMap<u32, LabelSet>) -> bool {
    let labels_ok = q
        .labels
        .iter()
        .all(|(d, need)| labels.get(d).is_some_and(|have| need.is_subset(have)));
    let year_ok = match record.year {
        Some(y) => q.year_min.is_none_or(|lo| y >= lo) && q.year_max.is_none_or(|hi| y <= hi),
        None => q.year_min.is_none() && q.year_max.is_none(),
    };
    let text_ok = q.text.iter().all(|term| {
        let term = term.to_lowercase();
        record.title.to_lowercase().contains(&term)
            || record
                .abstract_text
                .as_deref()
                .is_some_and(|a| a.to_lowercase().contains(&term))
    });
    labels_ok && year_ok && text_ok
}

impl KnowledgeBase {
    /// Records matching all predicates, newest first, then by id.
    pub fn query_records(&self, q: &Query) -> Result<Page<RecordHit>> {
        let state = self.state();
        q.validate(&state)?;
        let mut hits: Vec<RecordHit> = state
            .records
            .values()
            .filter_map(|r| {
                let labels = final_labels_of(&state, &r.record_id);
                matches(q, r, &labels).then(|| RecordHit {
                    record: r.clone(),
                    labels,
                })
            })
            .collect();
        hits.sort_by(|a, b| {
            b.record
                .year
                .cmp(&a.record.year)
                .then_with(|| a.record.record_id.cmp(&b.record.record_id))
        });
        let total = hits.len();
        let items = hits.into_iter().skip(q.offset).take(q.limit).collect();
        Ok(Page {
            total,
            offset: q.offset,
            limit: q.limit,
            items,
        })
    }
}
