use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use litreview_core::taxonomy::{format_response, Dimension, OutputGrammar};
use litreview_core::LabelSet;

use crate::{BackendError, ChatBackend, ModelId, RequestContext};

type Responder =
    dyn Fn(&ModelId, &str, &RequestContext) -> Result<String, BackendError> + Send + Sync;

/// Deterministic back-end driven by a closure, with in-flight
/// instrumentation.
pub struct MockBackend {
    respond: Arc<Responder>,
    delay: Duration,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn new<F>(respond: F) -> Self
    where
        F: Fn(&ModelId, &str, &RequestContext) -> Result<String, BackendError>
            + Send
            + Sync
            + 'static,
    {
        MockBackend {
            respond: Arc::new(respond),
            delay: Duration::ZERO,
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
            calls: AtomicUsize::new(0),
        }
    }

    /// Same reply to every prompt.
    pub fn constant(reply: impl Into<String>) -> Self {
        let reply = reply.into();
        Self::new(move |_, _, _| Ok(reply.clone()))
    }

    /// Answers with the canonical rendering of `labels(model, ctx)`.
    pub fn labelling<F>(dim: Dimension, grammar: OutputGrammar, labels: F) -> Self
    where
        F: Fn(&ModelId, &RequestContext) -> LabelSet + Send + Sync + 'static,
    {
        Self::new(move |model, _, ctx| Ok(format_response(&dim, grammar, &labels(model, ctx))))
    }

    /// Each call sleeps this long while counted as in flight.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    /// Highest number of concurrent calls seen so far.
    pub fn peak_in_flight(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl ChatBackend for MockBackend {
    async fn complete(
        &self,
        model: &ModelId,
        prompt: &str,
        ctx: &RequestContext,
    ) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        } else {
            tokio::task::yield_now().await;
        }
        let out = (self.respond)(model, prompt, ctx);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        out
    }
}
