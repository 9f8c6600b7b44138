//! JSON-over-HTTP hosting of bundles and graded sessions.
//!
//! Correct answers never leave the server: session payloads carry the
//! shuffled answer texts only, and grading happens on `POST .../answer`.

mod store;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;
use warehouse_core::session::{ModuleView, PresentedQuestion, Score, SessionEvent};
use warehouse_core::{SessionError, ViewEvent, ViewState};

pub use store::{BundleRecord, Lookup, ServiceConfig, SessionSlot, Source, Store, Upload, DEFAULT_MAX_UPLOAD, DEFAULT_TTL};

const INDEX_HTML: &str = include_str!("../../static/index.html");

pub type AppState = Arc<Store>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": code, "message": message.into() }) }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::PositionOutOfRange { .. } => StatusCode::BAD_REQUEST,
            _ => StatusCode::CONFLICT,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "BAD_REQUEST", e.to_string()))
}

/// What a client sees of a session. Deliberately has no answer key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub bundle_id: String,
    pub seed: u64,
    pub cursor: usize,
    pub total: usize,
    pub finished: bool,
    pub questions_enabled: bool,
    pub view: ViewState,
    pub score: Score,
    pub module: Option<ModuleView>,
    pub question: Option<PresentedQuestion>,
    /// Position already submitted for the current module, if any.
    pub answered_position: Option<usize>,
}

fn state_of(slot: &SessionSlot) -> SessionState {
    let s = &slot.session;
    let (module, question) = match s.present() {
        Ok((m, q)) => (Some(m), q),
        Err(_) => (None, None),
    };
    SessionState {
        session_id: slot.id.clone(),
        bundle_id: slot.bundle_id.clone(),
        seed: s.seed(),
        cursor: s.cursor(),
        total: s.bundle().len(),
        finished: s.is_finished(),
        questions_enabled: s.questions_enabled(),
        view: s.view(),
        score: s.score(),
        module,
        question,
        answered_position: s.answer_for(s.cursor()).map(|a| a.position),
    }
}

pub fn router(store: AppState) -> Router {
    let limit = store.config.max_upload;
    let static_dir = store.config.static_dir.clone();
    let api = Router::new()
        .route("/api/bundles", get(list_bundles).post(upload_bundle))
        .route("/api/bundles/{id}", get(get_bundle))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/answer", post(answer))
        .route("/api/sessions/{id}/advance", post(advance))
        .route("/api/sessions/{id}/view", post(view))
        .route("/api/sessions/{id}/questions", post(questions))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX_HTML) })),
    }
}

async fn list_bundles(State(store): State<AppState>) -> Json<Vec<BundleRecord>> {
    Json(store.bundle_records())
}

async fn get_bundle(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<BundleRecord>, ApiError> {
    store
        .bundle(&id)
        .map(|b| Json(b.record))
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_BUNDLE", format!("no bundle {id:?}")))
}

#[derive(Deserialize)]
struct UploadQuery {
    title: Option<String>,
}

async fn upload_bundle(
    State(store): State<AppState>,
    Query(q): Query<UploadQuery>,
    bytes: Bytes,
) -> Result<Response, ApiError> {
    let diag_body = |code: &str, d| json!({ "error": code, "diagnostics": d });
    Ok(match store.upload(&bytes, q.title).map_err(ApiError::internal)? {
        Upload::Created(r) => (StatusCode::CREATED, Json(r)).into_response(),
        Upload::Existing(r) => (StatusCode::OK, Json(r)).into_response(),
        Upload::NotZip(d) => (StatusCode::BAD_REQUEST, Json(diag_body("NOT_A_ZIP", d))).into_response(),
        Upload::Invalid(d) => {
            (StatusCode::UNPROCESSABLE_ENTITY, Json(diag_body("INVALID_BUNDLE", d))).into_response()
        }
    })
}

#[derive(Deserialize)]
struct CreateSession {
    bundle_id: String,
    seed: Option<u64>,
}

async fn create_session(State(store): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = body(&bytes)?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let slot = store
        .create_session(&req.bundle_id, seed)
        .map_err(ApiError::internal)?
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_BUNDLE", format!("no bundle {:?}", req.bundle_id)))?;
    let state = state_of(&slot.lock().unwrap());
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

fn live(store: &Store, id: &str) -> Result<Arc<std::sync::Mutex<SessionSlot>>, ApiError> {
    match store.lookup(id) {
        Lookup::Live(s) => Ok(s),
        Lookup::Expired => Err(ApiError::new(StatusCode::GONE, "SESSION_EXPIRED", "session expired")),
        Lookup::Missing => Err(ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_SESSION", format!("no session {id:?}"))),
    }
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    let slot = live(&store, &id)?;
    let slot = slot.lock().unwrap();
    Ok(Json(state_of(&slot)))
}

/// Applies one event under the session's lock and persists it.
fn apply(store: &Store, id: &str, event: SessionEvent) -> Result<(Option<bool>, SessionState), ApiError> {
    let slot = live(store, id)?;
    let mut slot = slot.lock().unwrap();
    let before = slot.session.log().len();
    let result = slot.session.apply(event)?;
    slot.last_activity_ms = store::now_ms();
    store.persist(&slot, before).map_err(ApiError::internal)?;
    Ok((result, state_of(&slot)))
}

#[derive(Deserialize)]
struct AnswerReq {
    position: usize,
}

async fn answer(State(store): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, ApiError> {
    let req: AnswerReq = body(&bytes)?;
    let (result, state) = apply(&store, &id, SessionEvent::Answer { position: req.position })?;
    Ok(Json(json!({ "correct": result.unwrap_or(false), "score": state.score })).into_response())
}

async fn advance(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    Ok(Json(apply(&store, &id, SessionEvent::Advance)?.1))
}

#[derive(Deserialize)]
struct ViewReq {
    event: ViewEvent,
}

async fn view(State(store): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> Result<Json<SessionState>, ApiError> {
    let req: ViewReq = body(&bytes)?;
    Ok(Json(apply(&store, &id, SessionEvent::View { event: req.event })?.1))
}

#[derive(Deserialize)]
struct QuestionsReq {
    enabled: bool,
}

async fn questions(
    State(store): State<AppState>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<Json<SessionState>, ApiError> {
    let req: QuestionsReq = body(&bytes)?;
    Ok(Json(apply(&store, &id, SessionEvent::Questions { enabled: req.enabled })?.1))
}

/// Binds, serves until Ctrl-C, and purges idle sessions in the background.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let store = Arc::new(Store::open(config)?);
    let period = (store.config.session_ttl / 4).clamp(Duration::from_secs(1), Duration::from_secs(60));
    let purger = store.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            purger.purge_expired();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
