//! HTTP facade over live exploration sessions.
//!
//! Each session has one writer at a time. A worker takes the session out of
//! its slot while learning or scoring; readers only ever see the state that
//! was published when the last phase finished.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use spatial_concepts::grid::{load_map, MapMetadata};
use spatial_concepts::runner::{
    metrics_csv, overlay, Config, Environment, ExplorationSession, Overlay, StepRecord, StopReason,
    VocabularyMode,
};
use spatial_concepts::teacher::{preprocess_sentence, preprocess_token, Annotation, AnswerMode};
use spatial_concepts::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    PendingQuery,
    Learning,
    Scoring,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub step: usize,
    pub candidate: usize,
    pub position: [f64; 2],
    pub travel_cells: f64,
}

/// Everything `GET /sessions/{id}/state` returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub id: String,
    pub phase: Phase,
    pub step: usize,
    pub pose: [f64; 2],
    pub visited: Vec<usize>,
    pub pending: Option<QueryView>,
    pub stop_reason: Option<StopReason>,
    pub vocabulary: Vec<String>,
    pub overlay: Overlay,
    pub metrics: Vec<StepRecord>,
    pub error: Option<String>,
}

struct Slot {
    phase: Phase,
    session: Option<ExplorationSession>,
    view: StateView,
    metrics_csv: String,
}

type Handle = Arc<Mutex<Slot>>;

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Handle>>,
    next_id: AtomicU64,
    defaults: Option<Config>,
}

impl AppState {
    /// `defaults` is used when a create request carries no config.
    pub fn new(defaults: Option<Config>) -> Self {
        Self {
            defaults,
            ..Self::default()
        }
    }

    fn get(&self, id: &str) -> Result<Handle, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/answer", post(post_answer))
        .route("/sessions/{id}/auto-step", post(auto_step))
        .route("/sessions/{id}/metrics.csv", get(get_metrics))
        .route("/sessions/{id}/overlay.json", get(get_overlay))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session '{id}'"))
    }

    fn conflict(phase: Phase) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            format!("no query is pending (phase {})", phase_name(phase)),
        )
    }
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::PendingQuery => "pending_query",
        Phase::Learning => "learning",
        Phase::Scoring => "scoring",
        Phase::Complete => "complete",
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NoPendingQuery | Error::ExplorationComplete => StatusCode::CONFLICT,
            Error::Io(_) | Error::Numerical(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

fn publish(
    id: &str,
    phase: Phase,
    session: &ExplorationSession,
    error: Option<String>,
) -> Result<(StateView, String), Error> {
    let view = StateView {
        id: id.to_string(),
        phase,
        step: session.records().len(),
        pose: session.exploration().current_pose,
        visited: session.exploration().visited.clone(),
        pending: session.pending().map(|q| QueryView {
            step: q.step,
            candidate: q.candidate,
            position: q.position,
            travel_cells: q.travel_cells,
        }),
        stop_reason: session.stopped(),
        vocabulary: session.vocabulary().words().to_vec(),
        overlay: overlay(session)?,
        metrics: session.records().to_vec(),
        error,
    };
    Ok((view, metrics_csv(session)?))
}

/// Puts the session back with a freshly published view.
fn store(
    slot: &Handle,
    id: &str,
    phase: Phase,
    session: ExplorationSession,
    error: Option<String>,
) {
    let published = publish(id, phase, &session, error.clone());
    let mut s = slot.lock().expect("slot lock");
    match published {
        Ok((view, csv)) => {
            s.view = view;
            s.metrics_csv = csv;
            s.phase = phase;
        }
        Err(e) => {
            s.view.error = Some(e.to_string());
            s.view.phase = phase;
            s.phase = phase;
        }
    }
    s.session = Some(session);
}

/// Scores the next query point in the background.
fn spawn_scoring(slot: Handle, id: String, mut session: ExplorationSession) {
    tokio::task::spawn_blocking(move || {
        let (phase, error) = match session.plan() {
            Ok(Some(_)) => (Phase::PendingQuery, None),
            Ok(None) => (Phase::Complete, None),
            Err(e) => (Phase::Complete, Some(e.to_string())),
        };
        store(&slot, &id, phase, session, error);
    });
}

/// Moves the slot from `PendingQuery` to `Learning` and hands out the
/// session; any other phase is a conflict.
fn begin_learning(slot: &Handle) -> Result<ExplorationSession, ApiError> {
    let mut s = slot.lock().expect("slot lock");
    if s.phase != Phase::PendingQuery {
        return Err(ApiError::conflict(s.phase));
    }
    let session = s
        .session
        .take()
        .expect("session present while a query is pending");
    s.phase = Phase::Learning;
    s.view.phase = Phase::Learning;
    Ok(session)
}

fn restore_pending(slot: &Handle, session: ExplorationSession) {
    let mut s = slot.lock().expect("slot lock");
    s.session = Some(session);
    s.phase = Phase::PendingQuery;
    s.view.phase = Phase::PendingQuery;
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMap {
    /// Binary graymap, base64-encoded.
    pub image_base64: String,
    /// Key-value metadata text.
    pub metadata: String,
    #[serde(default)]
    pub annotation: Option<Annotation>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub config: Option<Config>,
    #[serde(default)]
    pub map: Option<InlineMap>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub phase: Phase,
}

fn build_session(
    req: CreateSession,
    defaults: Option<Config>,
) -> Result<ExplorationSession, Error> {
    let mut config = req
        .config
        .or(defaults)
        .ok_or_else(|| Error::Config("no config given and the server has no default".into()))?;
    let env = match req.map {
        Some(m) => {
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(m.image_base64.as_bytes())
                .map_err(|e| Error::Map(format!("image is not base64: {e}")))?;
            let grid = load_map(&bytes, &MapMetadata::parse(&m.metadata)?)?;
            if m.annotation.is_none() {
                config.run.vocabulary = VocabularyMode::Growing;
            }
            Environment::from_parts(grid, m.annotation, Vec::new(), &config.env)?
        }
        None => Environment::build(&config.env)?,
    };
    ExplorationSession::new(config, Arc::new(env))
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let defaults = app.defaults.clone();
    let session = tokio::task::spawn_blocking(move || build_session(req, defaults))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let (view, csv) = publish(&id, Phase::Scoring, &session, None)?;
    let slot = Arc::new(Mutex::new(Slot {
        phase: Phase::Scoring,
        session: None,
        view,
        metrics_csv: csv,
    }));
    app.sessions
        .write()
        .expect("session map lock")
        .insert(id.clone(), slot.clone());
    spawn_scoring(slot, id.clone(), session);
    Ok((
        StatusCode::CREATED,
        Json(Created {
            id,
            phase: Phase::Scoring,
        }),
    ))
}

async fn get_state(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<StateView>, ApiError> {
    let slot = app.get(&id)?;
    let view = slot.lock().expect("slot lock").view.clone();
    Ok(Json(view))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnswerAck {
    pub step: usize,
    pub tokens: Vec<String>,
    pub phase: Phase,
}

enum Reply {
    Text(String),
    Scripted,
}

async fn learn(app: Arc<AppState>, id: String, reply: Reply) -> Result<Json<AnswerAck>, ApiError> {
    let slot = app.get(&id)?;
    let mut session = begin_learning(&slot)?;
    let worker = tokio::task::spawn_blocking(move || {
        let tokens = match reply {
            Reply::Text(text) => Ok(match session.config().run.answers {
                AnswerMode::SingleWord => preprocess_token(&text),
                AnswerMode::Sentence => preprocess_sentence(&text),
            }),
            Reply::Scripted => session.scripted_answer(),
        };
        let result = tokens.and_then(|t| session.answer(t).map(|r| (r.step, r.tokens.clone())));
        (session, result)
    });
    let (session, result) = match worker.await {
        Ok(done) => done,
        Err(e) => {
            return Err(ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                e.to_string(),
            ))
        }
    };
    match result {
        Ok((step, tokens)) => {
            // Make the new step visible before scoring starts.
            let (view, csv) = publish(&id, Phase::Scoring, &session, None)?;
            {
                let mut s = slot.lock().expect("slot lock");
                s.view = view;
                s.metrics_csv = csv;
                s.phase = Phase::Scoring;
            }
            spawn_scoring(slot, id, session);
            Ok(Json(AnswerAck {
                step,
                tokens,
                phase: Phase::Scoring,
            }))
        }
        Err(e) => {
            restore_pending(&slot, session);
            Err(e.into())
        }
    }
}

async fn post_answer(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<AnswerRequest>,
) -> Result<Json<AnswerAck>, ApiError> {
    learn(app, id, Reply::Text(req.text)).await
}

async fn auto_step(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<AnswerAck>, ApiError> {
    learn(app, id, Reply::Scripted).await
}

async fn get_metrics(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let slot = app.get(&id)?;
    let csv = slot.lock().expect("slot lock").metrics_csv.clone();
    Ok(([(header::CONTENT_TYPE, "text/csv")], csv).into_response())
}

async fn get_overlay(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Overlay>, ApiError> {
    let slot = app.get(&id)?;
    let overlay = slot.lock().expect("slot lock").view.overlay.clone();
    Ok(Json(overlay))
}
