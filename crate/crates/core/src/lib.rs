//! Core data model and analytics for LLM-assisted literature reviews:
//! corpus ingestion, taxonomies and prompts, evaluation metrics, citation
//! networks, trend tables and topic-model scores.
//!
//! Statistics are generic over the scalar type. The aliases at the crate
//! root fix it to `f64`; the `Exact*` aliases use `Ratio<i64>` where the
//! computation is pure counting.

pub mod baseline;
pub mod ingest;
mod labels;
pub mod metrics;
pub mod network;
pub mod scalar;
pub mod taxonomy;
pub mod topic_metrics;
pub mod trends;

pub use labels::LabelSet;
pub use scalar::{Fraction, Real};

pub use ingest::{BibRecord, CitationEdge, Corpus, FilterReport};
pub use taxonomy::{Dimension, PromptSpec, Taxonomy};

use num_rational::Ratio;

pub type MultiLabelReport = metrics::MultiLabelReport<f64>;
pub type ConsistencyReport = metrics::ConsistencyReport<f64>;
pub type MetricsReport = metrics::MetricsReport<f64>;
pub type ExactMultiLabelReport = metrics::MultiLabelReport<Ratio<i64>>;
pub type ExactConsistencyReport = metrics::ConsistencyReport<Ratio<i64>>;

pub type RankTable = network::RankTable<f64>;
pub type RankShiftMatrix = network::RankShiftMatrix<f64>;
pub type CategoryRankStats = network::CategoryRankStats<f64>;
pub type PageRankConfig = network::PageRankConfig<f64>;

pub type TemporalSeries = trends::TemporalSeries<f64>;
pub type ExactTemporalSeries = trends::TemporalSeries<Ratio<i64>>;
pub type CooccurrenceTable = trends::CooccurrenceTable<f64>;

pub type CorpusStats = topic_metrics::CorpusStats;
