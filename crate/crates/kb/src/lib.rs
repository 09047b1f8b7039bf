//! Knowledge base for classified literature: an append-only ledger of
//! records, model runs, final and gold labels, with structured retrieval,
//! an expert review workflow and an HTTP API on top.

pub mod api;
mod error;
pub mod ledger;
mod pipeline;
mod query;
mod review;
pub mod state;
mod store;

pub use error::{KbError, Result};
pub use ledger::{ExperimentMeta, FinalLabel, GoldLabel, LedgerEntry, Payload, RunEntry};
pub use pipeline::{ClassifySummary, IngestSummary};
pub use query::{matches, Page, Query, RecordHit, DEFAULT_LIMIT, MAX_LIMIT};
pub use review::{
    GoldAck, GoldSubmission, GoldView, HeatmapView, Heatmaps, MetricsView, ModelVotes, Queue,
    QueueItem,
};
pub use store::KnowledgeBase;

/// Version of every JSON document the API and CLI emit.
pub const SCHEMA_VERSION: u32 = 1;
