//! HTTP backend for blind MUSHRA sessions.
//!
//! `GET /health`, `GET /plan/{listener}`, `GET /audio/{token}` and
//! `POST /submit`. Plans are derived from the master seed, so they survive
//! restarts; submissions go through a single writer thread that appends to
//! the JSON-lines results store.

mod state;
mod writer;

use std::collections::BTreeMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use odaq_core::session::{PlanConfig, PublicPlan, SessionError, Submission, SubmitOutcome};
use odaq_core::Cohort;

pub use state::AppState;
pub use writer::{Writer, WriterThread};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub stimuli_dir: PathBuf,
    pub results_path: PathBuf,
    pub addr: SocketAddr,
    pub master_seed: u64,
    pub plan: PlanConfig,
    /// Registered listeners and their cohorts; `None` admits any listener id.
    pub roster: Option<BTreeMap<String, Cohort>>,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

/// Error payload returned to clients.
#[derive(Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    slots: Vec<odaq_core::session::SlotProblem>,
}

struct ApiError(SessionError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Forbidden(_) => StatusCode::FORBIDDEN,
            SessionError::Rejected(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Conflict(_) => StatusCode::CONFLICT,
            SessionError::Incomplete(_) | SessionError::Design(_) | SessionError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let slots = match &self.0 {
            SessionError::Rejected(p) => p.clone(),
            _ => Vec::new(),
        };
        (status, Json(ErrorBody { error: self.0.to_string(), slots })).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self(e)
    }
}

#[derive(Deserialize)]
struct PlanQuery {
    cohort: Option<String>,
}

#[derive(Serialize)]
struct PlanResponse {
    plan: PublicPlan,
    completed: Vec<String>,
}

#[derive(Serialize)]
struct SubmitResponse {
    status: &'static str,
    trial_id: String,
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn plan(State(state): State<Arc<AppState>>, Path(listener): Path<String>, Query(q): Query<PlanQuery>) -> Result<Json<PlanResponse>, ApiError> {
    let cohort = match q.cohort.as_deref() {
        Some(c) => Some(c.parse::<Cohort>().map_err(|e| SessionError::NotFound(e.to_string()))?),
        None => None,
    };
    let plan = state.plan_for(&listener, cohort)?;
    Ok(Json(PlanResponse { plan: plan.public_view(), completed: state.completed(&listener) }))
}

async fn audio(State(state): State<Arc<AppState>>, Path(token): Path<String>) -> Result<Response, ApiError> {
    let path = state.resolve_token(&token).ok_or_else(|| SessionError::NotFound("unknown token".into()))?;
    let bytes = tokio::fs::read(&path).await.map_err(|source| SessionError::Io { path, source })?;
    Ok(([(header::CONTENT_TYPE, "audio/wav"), (header::CACHE_CONTROL, "no-store")], bytes).into_response())
}

async fn submit(State(state): State<Arc<AppState>>, Json(sub): Json<Submission>) -> Result<Json<SubmitResponse>, ApiError> {
    let plan = state.plan_for(&sub.listener_id, None)?;
    let trial_id = sub.trial_id.clone();
    let outcome = state.writer.submit(plan, sub).await?;
    let status = match outcome {
        SubmitOutcome::Accepted(_) => "stored",
        SubmitOutcome::Duplicate => "duplicate",
    };
    Ok(Json(SubmitResponse { status, trial_id }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/plan/{listener}", get(plan))
        .route("/audio/{token}", get(audio))
        .route("/submit", post(submit))
        .with_state(state)
}

/// Bind, serve until `shutdown` resolves, then flush the store.
pub async fn run(config: ServiceConfig, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServiceError> {
    let (state, writer) = AppState::open(&config)?;
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServiceError::Io { context: format!("binding {}", config.addr), source })?;
    log::info!("listening on {}", listener.local_addr().map(|a| a.to_string()).unwrap_or_default());
    let served = axum::serve(listener, router(state.clone())).with_graceful_shutdown(shutdown).await;
    drop(state);
    writer.join();
    served.map_err(|source| ServiceError::Io { context: "serving".into(), source })
}

/// Resolves on ctrl-c.
pub async fn ctrl_c() {
    if let Err(e) = tokio::signal::ctrl_c().await {
        log::error!("installing the interrupt handler failed: {e}");
        std::future::pending::<()>().await;
    }
    log::info!("interrupt received, shutting down");
}
