use std::sync::{Arc, Mutex};
use std::time::Duration;

use amods::adaptive::Metrics;
use amods::ingest::{AttackClass, Label};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::session::{PendingItem, Session, SessionError, SessionState};

#[derive(Clone)]
pub struct AppState {
    pub session: Arc<Mutex<Session>>,
    /// Upper bound on how long `advance` waits for retraining.
    pub advance_timeout: Duration,
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::WrongState(s) => ApiError(StatusCode::CONFLICT, format!("not allowed in state {s:?}")),
            SessionError::UnknownQuery(q) => ApiError(StatusCode::NOT_FOUND, format!("unknown query_id {q:?}")),
            SessionError::Failed(m) => ApiError(StatusCode::INTERNAL_SERVER_ERROR, m),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs `f` on the session off the async workers; the mutex serializes writers.
async fn with_session<T: Send + 'static>(
    state: &AppState,
    f: impl FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    let session = state.session.clone();
    tokio::task::spawn_blocking(move || {
        let mut guard = session.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

#[derive(Serialize)]
pub struct MetricsPoint {
    pub batch: u32,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub malicious_obtained: usize,
    pub drift_flag: bool,
}

#[derive(Serialize)]
pub struct SessionView {
    pub id: String,
    pub state: SessionState,
    pub current_batch: Option<u32>,
    pub pending_count: usize,
    pub selected_count: usize,
    pub batches_done: usize,
    pub batches_total: usize,
    pub metrics_history: Vec<MetricsPoint>,
}

fn view(s: &Session) -> SessionView {
    SessionView {
        id: s.id().to_owned(),
        state: s.state(),
        current_batch: s.current_batch(),
        pending_count: s.remaining(),
        selected_count: s.pending_items().len(),
        batches_done: s.run().reports.len(),
        batches_total: s.batches_total(),
        metrics_history: s
            .run()
            .reports
            .iter()
            .map(|r| MetricsPoint {
                batch: r.batch,
                metrics: r.metrics.clone(),
                malicious_obtained: r.malicious_obtained,
                drift_flag: r.drift_flag,
            })
            .collect(),
    }
}

async fn get_session(State(st): State<AppState>) -> ApiResult<SessionView> {
    with_session(&st, |s| Ok(view(s))).await.map(Json)
}

#[derive(Deserialize)]
struct Page {
    #[serde(default)]
    offset: usize,
    limit: Option<usize>,
}

const DEFAULT_PAGE: usize = 50;
const MAX_PAGE: usize = 1000;

async fn get_pending(State(st): State<AppState>, Query(page): Query<Page>) -> ApiResult<Vec<PendingItem>> {
    let limit = page.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE);
    with_session(&st, move |s| Ok(s.pending_items().into_iter().skip(page.offset).take(limit).collect()))
        .await
        .map(Json)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelItem {
    query_id: String,
    label: String,
    #[serde(default)]
    attack_class: Option<String>,
}

fn parse_label(s: &str) -> Option<Label> {
    match s.to_ascii_lowercase().as_str() {
        "benign" => Some(Label::Benign),
        "malicious" => Some(Label::Malicious),
        _ => None,
    }
}

fn parse_class(s: &str) -> Result<Option<AttackClass>, ()> {
    match s.to_ascii_uppercase().as_str() {
        "SQLI" => Ok(Some(AttackClass::Sqli)),
        "XSS" => Ok(Some(AttackClass::Xss)),
        "DT" => Ok(Some(AttackClass::Dt)),
        "RFI" => Ok(Some(AttackClass::Rfi)),
        "OTHER" => Ok(None),
        _ => Err(()),
    }
}

async fn post_labels(State(st): State<AppState>, body: Bytes) -> ApiResult<serde_json::Value> {
    let bad = |m: String| ApiError(StatusCode::BAD_REQUEST, m);
    let items: Vec<LabelItem> = serde_json::from_slice(&body).map_err(|e| bad(format!("malformed body: {e}")))?;
    let mut parsed = Vec::with_capacity(items.len());
    for it in items {
        let label = parse_label(&it.label).ok_or_else(|| bad(format!("unknown label {:?}", it.label)))?;
        let class = match &it.attack_class {
            Some(c) => parse_class(c).map_err(|_| bad(format!("unknown attack_class {c:?}")))?,
            None => None,
        };
        parsed.push((it.query_id, label, class));
    }
    with_session(&st, move |s| {
        let remaining = s.submit(&parsed)?;
        Ok(json!({ "remaining": remaining, "state": s.state() }))
    })
    .await
    .map(Json)
}

async fn post_advance(State(st): State<AppState>) -> Result<Response, ApiError> {
    let work = with_session(&st, |s| {
        let report = s.advance()?;
        Ok(json!({ "report": report, "session": view(s) }))
    });
    match tokio::time::timeout(st.advance_timeout, work).await {
        Ok(r) => r.map(|v| Json(v).into_response()),
        Err(_) => Err(ApiError(
            StatusCode::SERVICE_UNAVAILABLE,
            "retraining still running; poll GET /api/session".into(),
        )),
    }
}

async fn get_report(State(st): State<AppState>, Path(batch): Path<String>) -> Result<Response, ApiError> {
    let batch: u32 = batch.parse().map_err(|_| ApiError(StatusCode::BAD_REQUEST, format!("bad batch id {batch:?}")))?;
    with_session(&st, move |s| {
        s.report(batch)
            .map(|r| Json(r).into_response())
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no report for batch {batch}")))
    })
    .await
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/session", get(get_session))
        .route("/api/pending", get(get_pending))
        .route("/api/labels", post(post_labels))
        .route("/api/advance", post(post_advance))
        .route("/api/report/{batch}", get(get_report))
        .with_state(state)
}
