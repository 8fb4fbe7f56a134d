//! JSON session API.
//!
//! ```text
//! POST /sessions               {spec}              -> SessionView
//! GET  /sessions/{id}/state                        -> SessionView
//! POST /sessions/{id}/query    {symbol, point}     -> {value, seq, new_event, view}
//! POST /sessions/{id}/eval     {formula}           -> {formula, satisfied, verdict, report}
//! GET  /sessions/{id}/log                          -> {events}
//! ```
//!
//! Errors are `{code, message, position?}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::{EvalOutcome, Event, Session, SessionView};

/// Live sessions. Each session has its own lock, so mutations on one session
/// run in arrival order while other sessions proceed independently.
#[derive(Clone, Default)]
pub struct Sessions {
    inner: Arc<RwLock<HashMap<String, Arc<Mutex<Session>>>>>,
}

impl Sessions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, spec: &str) -> Result<SessionView, ServiceError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::create(id.clone(), spec)?;
        let view = session.view();
        self.inner.write().expect("session map lock").insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    pub fn with<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let session = self.inner.read().expect("session map lock").get(id).cloned();
        let session = session.ok_or_else(|| ServiceError::unknown_session(id))?;
        let mut guard = session.lock().expect("session lock");
        f(&mut guard)
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub spec: String,
}

#[derive(Debug, Deserialize)]
pub struct QueryRequest {
    pub symbol: String,
    pub point: Vec<u32>,
}

#[derive(Debug, Deserialize)]
pub struct EvalRequest {
    pub formula: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryResponse {
    pub value: u32,
    pub seq: u64,
    pub new_event: bool,
    pub view: SessionView,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LogResponse {
    pub events: Vec<Event>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self.code {
            "unknown_session" => StatusCode::NOT_FOUND,
            "bad_request" => StatusCode::BAD_REQUEST,
            "io_error" | "internal" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        (status, Json(self)).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload.map(|Json(t)| t).map_err(|e| ServiceError::new("bad_request", e.body_text()))
}

pub fn router(sessions: Sessions) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/query", post(query))
        .route("/sessions/{id}/eval", post(eval))
        .route("/sessions/{id}/log", get(log))
        .with_state(sessions)
}

async fn create(
    State(sessions): State<Sessions>,
    payload: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ServiceError> {
    let req = body(payload)?;
    Ok((StatusCode::CREATED, Json(sessions.create(&req.spec)?)))
}

async fn state(State(sessions): State<Sessions>, Path(id): Path<String>) -> Result<Json<SessionView>, ServiceError> {
    sessions.with(&id, |s| Ok(Json(s.view())))
}

async fn query(
    State(sessions): State<Sessions>,
    Path(id): Path<String>,
    payload: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Json<QueryResponse>, ServiceError> {
    let req = body(payload)?;
    sessions.with(&id, |s| {
        let out = s.query(&req.symbol, &req.point)?;
        Ok(Json(QueryResponse { value: out.value, seq: out.seq, new_event: out.new_event, view: s.view() }))
    })
}

async fn eval(
    State(sessions): State<Sessions>,
    Path(id): Path<String>,
    payload: Result<Json<EvalRequest>, JsonRejection>,
) -> Result<Json<EvalOutcome>, ServiceError> {
    let req = body(payload)?;
    sessions.with(&id, |s| s.eval(&req.formula).map(Json))
}

async fn log(State(sessions): State<Sessions>, Path(id): Path<String>) -> Result<Json<LogResponse>, ServiceError> {
    sessions.with(&id, |s| Ok(Json(LogResponse { events: s.log().to_vec() })))
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: &str, sessions: Sessions) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(sessions)).await
}
