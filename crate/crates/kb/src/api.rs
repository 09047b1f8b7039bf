//! JSON-over-HTTP review API.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Multipart, Path, Query as QueryParams, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use litreview_core::ingest::{parse_csv_str, parse_json_lines_str, InputFormat};
use litreview_core::LabelSet;
use litreview_llm::{ChatBackend, HttpBackend};
use serde::{Deserialize, Serialize};

use crate::error::KbError;
use crate::ledger::ExperimentMeta;
use crate::query::{Query, DEFAULT_LIMIT};
use crate::{GoldSubmission, KnowledgeBase, SCHEMA_VERSION};

/// Environment variable holding the shared bearer token. Unset means no
/// authentication.
pub const TOKEN_ENV: &str = "LITREVIEW_API_TOKEN";

pub type BackendFactory =
    Arc<dyn Fn(&ExperimentMeta) -> Result<Arc<dyn ChatBackend>, KbError> + Send + Sync>;

/// Builds an HTTP back-end from the experiment's client config.
pub fn http_backends() -> BackendFactory {
    Arc::new(|meta: &ExperimentMeta| {
        Ok(Arc::new(HttpBackend::from_config(&meta.client)?) as Arc<dyn ChatBackend>)
    })
}

#[derive(Clone)]
pub struct AppState {
    pub kb: Arc<KnowledgeBase>,
    pub backends: BackendFactory,
    pub token: Option<String>,
}

impl AppState {
    pub fn new(kb: Arc<KnowledgeBase>, backends: BackendFactory) -> Self {
        AppState {
            kb,
            backends,
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
        }
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token;
        self
    }
}

/// Every body is wrapped with the schema version.
#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub data: T,
}

pub fn envelope<T: Serialize>(data: T) -> Envelope<T> {
    Envelope {
        schema_version: SCHEMA_VERSION,
        data,
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError(StatusCode, &'static str, String);

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError(StatusCode::BAD_REQUEST, "bad_request", message.into())
    }
}

impl From<KbError> for ApiError {
    fn from(e: KbError) -> Self {
        let (status, code) = match &e {
            KbError::UnknownRecord(_) => (StatusCode::NOT_FOUND, "unknown_record"),
            KbError::UnknownExperiment(_) => (StatusCode::NOT_FOUND, "unknown_experiment"),
            KbError::Taxonomy(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_label"),
            KbError::Schema { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "schema"),
            KbError::Query(_) => (StatusCode::BAD_REQUEST, "invalid_query"),
            KbError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            KbError::NoActiveConfig => (StatusCode::CONFLICT, "no_active_config"),
            KbError::NothingToCompare(_) => (StatusCode::CONFLICT, "nothing_to_compare"),
            KbError::Ingest(_) => (StatusCode::BAD_REQUEST, "ingest"),
            KbError::Llm(_) => (StatusCode::BAD_GATEWAY, "llm"),
            KbError::Metrics(_) => (StatusCode::UNPROCESSABLE_ENTITY, "metrics"),
            KbError::Storage { .. } | KbError::Corrupt { .. } => {
                (StatusCode::INTERNAL_SERVER_ERROR, "storage")
            }
        };
        ApiError(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.0.is_server_error() {
            tracing::error!(code = self.1, "{}", self.2);
        }
        let body = envelope(ErrorBody {
            error: ErrorDetail {
                code: self.1.into(),
                message: self.2,
            },
        });
        (self.0, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<Envelope<T>>, ApiError>;

pub fn router(state: AppState) -> Router {
    let protected = Router::new()
        .route("/records", get(records))
        .route("/experiments", get(experiments))
        .route("/experiments/{id}/queue", get(queue))
        .route("/experiments/{id}/metrics", get(metrics))
        .route("/experiments/{id}/heatmap", get(heatmap))
        .route("/gold", post(gold))
        .route("/ingest", post(ingest))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .route("/health", get(health))
        .merge(protected)
        .fallback(|| async { ApiError(StatusCode::NOT_FOUND, "not_found", "no such endpoint".into()) })
        .with_state(state)
}

async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let given = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_str()) {
            return ApiError(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token".into())
                .into_response();
        }
    }
    next.run(req).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub records: usize,
    pub experiments: usize,
    pub ledger_entries: u64,
    pub active_experiment: Option<String>,
}

async fn health(State(s): State<AppState>) -> Json<Envelope<Health>> {
    let state = s.kb.state();
    Json(envelope(Health {
        status: "ok".into(),
        records: state.records.len(),
        experiments: state.experiments.len(),
        ledger_entries: state.entries,
        active_experiment: state.active.clone(),
    }))
}

/// `GET /records` parameters. `labels` is a comma-separated list of
/// `dim:category` pairs, `q` whitespace-separated text terms.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct RecordParams {
    pub labels: Option<String>,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
    pub q: Option<String>,
    pub offset: Option<usize>,
    pub limit: Option<usize>,
}

impl RecordParams {
    pub fn to_query(&self) -> Result<Query, KbError> {
        let mut labels: BTreeMap<u32, LabelSet> = BTreeMap::new();
        for pair in self.labels.iter().flat_map(|l| l.split(',')).map(str::trim).filter(|p| !p.is_empty()) {
            let (dim, cat) = pair
                .split_once(':')
                .ok_or_else(|| KbError::Query(format!("label predicate `{pair}` is not dim:category")))?;
            let dim: u32 = dim
                .trim()
                .parse()
                .map_err(|_| KbError::Query(format!("`{dim}` is not a dimension id")))?;
            labels.entry(dim).or_default().insert(cat.trim());
        }
        Ok(Query {
            labels,
            year_min: self.year_min,
            year_max: self.year_max,
            text: self
                .q
                .iter()
                .flat_map(|q| q.split_whitespace())
                .map(str::to_owned)
                .collect(),
            offset: self.offset.unwrap_or(0),
            limit: self.limit.unwrap_or(DEFAULT_LIMIT),
        })
    }
}

async fn records(
    State(s): State<AppState>,
    params: Result<QueryParams<RecordParams>, QueryRejection>,
) -> ApiResult<crate::Page<crate::RecordHit>> {
    let QueryParams(params) = params.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let q = params.to_query()?;
    Ok(Json(envelope(s.kb.query_records(&q)?)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Experiments {
    pub experiments: Vec<ExperimentMeta>,
}

async fn experiments(State(s): State<AppState>) -> Json<Envelope<Experiments>> {
    let state = s.kb.state();
    Json(envelope(Experiments {
        experiments: state.experiments.values().map(|e| e.meta.clone()).collect(),
    }))
}

#[derive(Debug, Deserialize)]
struct DimParam {
    dim: Option<u32>,
}

type DimQuery = Result<QueryParams<DimParam>, QueryRejection>;

fn optional_dim(p: DimQuery) -> Result<Option<u32>, ApiError> {
    p.map(|QueryParams(p)| p.dim)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

fn required_dim(p: DimQuery) -> Result<u32, ApiError> {
    optional_dim(p)?.ok_or_else(|| ApiError::bad_request("query parameter `dim` is required"))
}

async fn queue(
    State(s): State<AppState>,
    Path(id): Path<String>,
    p: DimQuery,
) -> ApiResult<crate::Queue> {
    Ok(Json(envelope(s.kb.disagreement_queue(&id, required_dim(p)?)?)))
}

async fn metrics(
    State(s): State<AppState>,
    Path(id): Path<String>,
    p: DimQuery,
) -> ApiResult<crate::MetricsView> {
    Ok(Json(envelope(s.kb.metrics(&id, required_dim(p)?)?)))
}

async fn heatmap(
    State(s): State<AppState>,
    Path(id): Path<String>,
    p: DimQuery,
) -> ApiResult<crate::Heatmaps> {
    Ok(Json(envelope(s.kb.heatmap(&id, optional_dim(p)?)?)))
}

async fn gold(
    State(s): State<AppState>,
    body: Result<Json<GoldSubmission>, JsonRejection>,
) -> ApiResult<crate::GoldAck> {
    let Json(sub) = body.map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, "schema", e.body_text()))?;
    let kb = s.kb.clone();
    let ack = tokio::task::spawn_blocking(move || kb.record_gold_label(sub))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(envelope(ack)))
}

/// Multipart upload with a `file` part; its file name decides between CSV
/// and JSON lines.
async fn ingest(State(s): State<AppState>, mut form: Multipart) -> ApiResult<crate::IngestSummary> {
    let mut upload = None;
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(e.body_text()))?
    {
        if field.name() == Some("file") {
            let name = field.file_name().unwrap_or("upload.csv").to_owned();
            let text = field
                .text()
                .await
                .map_err(|e| ApiError::bad_request(e.body_text()))?;
            upload = Some((name, text));
        }
    }
    let (name, text) = upload.ok_or_else(|| ApiError::bad_request("multipart part `file` is missing"))?;
    let meta = s.kb.state().active_meta().cloned().ok_or(KbError::NoActiveConfig)?;
    let corpus = match InputFormat::from_path(std::path::Path::new(&name)) {
        InputFormat::Csv => parse_csv_str(&text, &name),
        InputFormat::JsonLines => parse_json_lines_str(&text, &name),
    }
    .map_err(KbError::from)?;
    let backend = (s.backends)(&meta)?;
    Ok(Json(envelope(s.kb.ingest_corpus(corpus, backend).await?)))
}
