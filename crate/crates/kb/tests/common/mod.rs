#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use litreview_core::taxonomy::{builtin_prompt, builtin_taxonomy, format_response, Dimension, OutputGrammar};
use litreview_core::{BibRecord, LabelSet};
use litreview_kb::{ExperimentMeta, KnowledgeBase, Payload};
use litreview_llm::{ClientConfig, MockBackend, ModelId, RequestContext};

pub fn open(dir: &Path) -> KnowledgeBase {
    KnowledgeBase::open(&dir.join("ledger.jsonl"), builtin_taxonomy()).unwrap()
}

pub fn model(name: &str) -> ModelId {
    ModelId::new("mock", name).unwrap()
}

pub fn client() -> ClientConfig {
    ClientConfig {
        max_in_flight: 16,
        retry_budget: 1,
        backoff_base_ms: 1,
        backoff_max_ms: 2,
        ..Default::default()
    }
}

pub fn meta(id: &str, models: &[&str], prompts: &[&str], k: u32, active: bool) -> ExperimentMeta {
    ExperimentMeta {
        experiment_id: id.into(),
        description: String::new(),
        models: models.iter().map(|m| model(m)).collect(),
        prompts: prompts.iter().map(|p| builtin_prompt(p).unwrap()).collect(),
        k,
        client: client(),
        active,
    }
}

pub fn record(id: &str, year: i32, title: &str, abstract_text: &str) -> BibRecord {
    BibRecord::new(id, title).with_year(year).with_abstract(abstract_text)
}

pub fn add_records(kb: &KnowledgeBase, records: &[BibRecord]) {
    kb.append_all(records.iter().cloned().map(Payload::Record).collect())
        .unwrap();
}

/// Answers every prompt with the canonical rendering of `labels(model, ctx)`
/// in the label space and grammar of the prompt used for that dimension.
pub fn scripted<F>(prompts: &[&str], labels: F) -> Arc<MockBackend>
where
    F: Fn(&ModelId, &RequestContext) -> LabelSet + Send + Sync + 'static,
{
    let tax = builtin_taxonomy();
    let spaces: BTreeMap<u32, (Dimension, OutputGrammar)> = prompts
        .iter()
        .map(|p| {
            let spec = builtin_prompt(p).unwrap();
            (spec.dim_id, (tax.response_dimension(&spec).unwrap(), spec.output_grammar))
        })
        .collect();
    Arc::new(MockBackend::new(move |m, _, ctx| {
        let (dim, grammar) = &spaces[&ctx.dim_id];
        Ok(format_response(dim, *grammar, &labels(m, ctx)))
    }))
}
