use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use titl_core::{ExportFormat, SearchMode, SearchResult};

use crate::error::ApiError;
use crate::AppState;

pub fn api_routes() -> Router<Arc<AppState>> {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/feedback", post(feedback))
        .route("/api/sessions/{id}/more", post(more))
        .route("/api/sessions/{id}/export", get(export))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    corpus_sentences: usize,
    dim: usize,
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health {
        status: "ok",
        corpus_sentences: state.engine.index().len(),
        dim: state.engine.dim(),
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultItem {
    pub id: u64,
    pub text: String,
    pub score: f64,
    pub rank: usize,
}

impl From<SearchResult> for ResultItem {
    fn from(r: SearchResult) -> Self {
        ResultItem {
            id: r.sentence_id,
            text: r.text,
            score: r.score,
            rank: r.rank,
        }
    }
}

#[derive(Deserialize)]
struct CreateRequest {
    query: String,
    k: Option<i64>,
    mode: Option<String>,
    alpha: Option<f64>,
}

#[derive(Serialize)]
struct CreateResponse {
    session_id: String,
    results: Vec<ResultItem>,
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let req: CreateRequest = parse_json(&body)?;
    let k = match req.k {
        None => state.default_k,
        Some(k) if k >= 1 => k as usize,
        Some(k) => return Err(ApiError::bad_request(format!("k must be at least 1, got {k}"))),
    };
    if let Some(alpha) = req.alpha {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ApiError::bad_request(format!("alpha must be in [0, 1], got {alpha}")));
        }
    }
    let mode = match req.mode.as_deref() {
        None => match (state.default_mode, req.alpha) {
            (SearchMode::Hybrid { .. }, Some(alpha)) => SearchMode::Hybrid { alpha },
            (mode, _) => mode,
        },
        Some(name) => SearchMode::parse(name, req.alpha)
            .map_err(|e| ApiError::unprocessable(e.to_string()))?,
    };
    let mut session = state
        .engine
        .create_session(&req.query, mode, k)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let results = state.engine.next_results(&mut session);
    let session_id = session.session_id.clone();
    state.store.insert(session);
    tracing::debug!(%session_id, "session created");
    Ok((
        StatusCode::CREATED,
        Json(CreateResponse {
            session_id,
            results: results.into_iter().map(ResultItem::from).collect(),
        }),
    ))
}

#[derive(Deserialize)]
struct Judgment {
    sentence_id: u64,
    relevant: bool,
}

#[derive(Deserialize)]
struct FeedbackRequest {
    judgments: Vec<Judgment>,
}

#[derive(Serialize)]
struct FeedbackResponse {
    relevant_count: usize,
    irrelevant_count: usize,
}

fn unknown_session(id: &str) -> ApiError {
    ApiError::not_found(format!("unknown session {id:?}"))
}

async fn feedback(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<FeedbackResponse>, ApiError> {
    let slot = state.store.get(&id).ok_or_else(|| unknown_session(&id))?;
    let req: FeedbackRequest = parse_json(&body)?;
    let mut slot = slot.lock();
    let session = &mut slot.session;
    if let Some(j) = req.judgments.iter().find(|j| !session.shown.contains(&j.sentence_id)) {
        return Err(ApiError::conflict(format!(
            "sentence {} has not been shown in this session",
            j.sentence_id
        )));
    }
    for j in &req.judgments {
        session
            .record_feedback(j.sentence_id, j.relevant)
            .map_err(|e| ApiError::conflict(e.to_string()))?;
    }
    Ok(Json(FeedbackResponse {
        relevant_count: session.relevant.len(),
        irrelevant_count: session.irrelevant.len(),
    }))
}

#[derive(Serialize)]
struct MoreResponse {
    results: Vec<ResultItem>,
}

async fn more(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<MoreResponse>, ApiError> {
    let slot = state.store.get(&id).ok_or_else(|| unknown_session(&id))?;
    if !body.iter().all(u8::is_ascii_whitespace) {
        parse_json::<serde_json::Map<String, serde_json::Value>>(&body)?;
    }
    let results = state.engine.next_results(&mut slot.lock().session);
    Ok(Json(MoreResponse {
        results: results.into_iter().map(ResultItem::from).collect(),
    }))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    let slot = state.store.get(&id).ok_or_else(|| unknown_session(&id))?;
    let format: ExportFormat = query
        .format
        .as_deref()
        .unwrap_or("txt")
        .parse()
        .map_err(|e: titl_core::Error| ApiError::bad_request(e.to_string()))?;
    let body = state.engine.export(&slot.lock().session, format);
    let disposition = format!("attachment; filename=\"titl-{id}.{}\"", format.extension());
    let disposition = HeaderValue::from_str(&disposition)
        .map_err(|_| ApiError::bad_request("session id is not a valid header value"))?;
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static(format.content_type())),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        body,
    )
        .into_response())
}
