use std::num::NonZeroU32;
use std::sync::Arc;
use std::time::Instant;

use governor::{DefaultDirectRateLimiter, Quota, RateLimiter};
use litreview_core::taxonomy::{parse_response, render_prompt, Dimension, PromptSpec, Taxonomy};
use litreview_core::BibRecord;
use tokio::sync::Semaphore;
use tokio::task::JoinSet;

use crate::{
    BackendError, ChatBackend, ClientConfig, LlmError, ModelId, RequestContext, RunOutcome,
    RunResult,
};

/// What to run: one prompt on one model, `k` times per record.
#[derive(Debug, Clone)]
pub struct BatchRequest {
    pub model: ModelId,
    pub spec: PromptSpec,
    /// Label space the responses are parsed against.
    pub dim: Dimension,
    pub k: u32,
}

impl BatchRequest {
    pub fn new(
        taxonomy: &Taxonomy,
        model: ModelId,
        spec: PromptSpec,
        k: u32,
    ) -> Result<Self, LlmError> {
        let dim = taxonomy.response_dimension(&spec)?;
        Ok(BatchRequest { model, spec, dim, k })
    }
}

struct Shared {
    backend: Arc<dyn ChatBackend>,
    limiter: Option<DefaultDirectRateLimiter>,
    config: ClientConfig,
    request: BatchRequest,
}

/// Sends every record's prompt `k` times, at most `max_in_flight` at once
/// and within the per-minute budget. Transport failures are retried with
/// exponential backoff under the same run index; what still fails becomes
/// an error result. Results come back ordered by record, then run index.
pub async fn classify_batch(
    backend: Arc<dyn ChatBackend>,
    config: &ClientConfig,
    request: BatchRequest,
    records: &[BibRecord],
) -> Result<Vec<RunResult>, LlmError> {
    config.validate()?;
    if request.k == 0 {
        return Err(LlmError::ZeroReplication);
    }
    if records.is_empty() {
        return Err(LlmError::NoRecords);
    }
    let prompts: Vec<Arc<str>> = records
        .iter()
        .map(|r| {
            let text = r
                .abstract_str()
                .ok_or_else(|| LlmError::MissingAbstract(r.record_id.clone()))?;
            Ok(Arc::from(render_prompt(&request.spec, text)?))
        })
        .collect::<Result<_, LlmError>>()?;

    let k = request.k;
    let shared = Arc::new(Shared {
        backend,
        limiter: NonZeroU32::new(config.per_minute_budget)
            .map(|n| RateLimiter::direct(Quota::per_minute(n).allow_burst(NonZeroU32::MIN))),
        config: config.clone(),
        request,
    });
    let slots = Arc::new(Semaphore::new(config.max_in_flight));
    let mut tasks = JoinSet::new();
    for (pos, (record, prompt)) in records.iter().zip(prompts).enumerate() {
        for run_index in 1..=k {
            let permit = slots
                .clone()
                .acquire_owned()
                .await
                .map_err(|e| LlmError::Join(e.to_string()))?;
            let shared = shared.clone();
            let prompt = prompt.clone();
            let ctx = RequestContext {
                record_id: record.record_id.clone(),
                dim_id: shared.request.spec.dim_id,
                run_index,
                attempt: 0,
            };
            tasks.spawn(async move {
                let result = run_one(&shared, &prompt, ctx).await;
                drop(permit);
                (pos, result)
            });
        }
    }
    let mut out = Vec::with_capacity(records.len() * k as usize);
    while let Some(joined) = tasks.join_next().await {
        out.push(joined.map_err(|e| LlmError::Join(e.to_string()))?);
    }
    out.sort_by_key(|(pos, r)| (*pos, r.run_index));
    Ok(out.into_iter().map(|(_, r)| r).collect())
}

async fn run_one(shared: &Shared, prompt: &str, mut ctx: RequestContext) -> RunResult {
    let started = Instant::now();
    let req = &shared.request;
    let reply: Result<String, (BackendError, u32)> = loop {
        if let Some(limiter) = &shared.limiter {
            limiter.until_ready().await;
        }
        match shared.backend.complete(&req.model, prompt, &ctx).await {
            Ok(text) => break Ok(text),
            Err(e) if e.is_retryable() && ctx.attempt < shared.config.retry_budget => {
                ctx.attempt += 1;
                tracing::warn!(
                    record = %ctx.record_id,
                    run = ctx.run_index,
                    attempt = ctx.attempt,
                    error = %e,
                    "retrying"
                );
                tokio::time::sleep(shared.config.backoff(ctx.attempt)).await;
            }
            Err(e) => break Err((e, ctx.attempt + 1)),
        }
    };
    let (raw_response, outcome) = match reply {
        Ok(text) => {
            let outcome = match parse_response(&req.dim, req.spec.output_grammar, &text) {
                Ok(labels) => RunOutcome::Parsed { labels },
                Err(f) => RunOutcome::ParseFailure { reason: f.reason },
            };
            (text, outcome)
        }
        Err((e, attempts)) => (
            String::new(),
            RunOutcome::Error {
                message: e.to_string(),
                attempts,
            },
        ),
    };
    RunResult {
        record_id: ctx.record_id,
        dim_id: ctx.dim_id,
        prompt_id: req.spec.prompt_id.clone(),
        model: req.model.clone(),
        run_index: ctx.run_index,
        raw_response,
        outcome,
        latency_ms: started.elapsed().as_millis() as u64,
        timestamp: chrono::Utc::now(),
    }
}
