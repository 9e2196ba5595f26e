//! HTTP service for the study UI.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | GET | `/api/cases/next?reader=ID` | | [`NextCase`] |
//! | POST | `/api/cases/{id}/phase1` | [`Phase1Submission`] | [`Phase2Payload`] |
//! | POST | `/api/cases/{id}/phase2` | [`Phase2Submission`] | `{"ok": true}` |
//! | POST | `/api/cases/{id}/skip` | [`SkipSubmission`] | `{"ok": true}` |
//! | GET | `/api/export` | | [`StudyExport`](super::StudyExport) |
//! | GET | `/api/progress?reader=ID` | | [`Progress`] |
//!
//! Errors are `{"error": code, "message": text}` with a 4xx/5xx status.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::{export_study, Phase1Submission, Phase2Submission, SkipSubmission, StudyError, StudyStore};

pub type SharedStore = Arc<Mutex<StudyStore>>;

impl StudyError {
    pub fn code(&self) -> &'static str {
        match self {
            StudyError::UnknownReader(_) => "unknown_reader",
            StudyError::UnknownCase(_) => "unknown_case",
            StudyError::CaseNotServable(_) => "case_not_servable",
            StudyError::NoCasesRemaining => "no_cases_remaining",
            StudyError::AwaitingPhase2(_) => "awaiting_phase2",
            StudyError::DuplicateSubmission => "duplicate_submission",
            StudyError::IncompleteJudgments(_) => "incomplete_judgments",
            StudyError::Phase1Missing => "phase1_missing",
            StudyError::MissingResponses(_) => "missing_responses",
            StudyError::PhaseOrder { .. } => "phase_order",
            StudyError::CorruptLog { .. } => "corrupt_log",
            StudyError::Io(_) => "io",
        }
    }

    fn status(&self) -> StatusCode {
        match self {
            StudyError::UnknownReader(_) | StudyError::UnknownCase(_) | StudyError::NoCasesRemaining => {
                StatusCode::NOT_FOUND
            }
            StudyError::IncompleteJudgments(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StudyError::CaseNotServable(_)
            | StudyError::AwaitingPhase2(_)
            | StudyError::DuplicateSubmission
            | StudyError::Phase1Missing => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for StudyError {
    fn into_response(self) -> Response {
        let body = json!({"error": self.code(), "message": self.to_string()});
        (self.status(), Json(body)).into_response()
    }
}

#[derive(Deserialize)]
struct ReaderQuery {
    reader: String,
}

fn ok() -> Json<serde_json::Value> {
    Json(json!({"ok": true}))
}

async fn next_case(State(s): State<SharedStore>, Query(q): Query<ReaderQuery>) -> Result<Response, StudyError> {
    Ok(Json(s.lock().unwrap().serve_next(&q.reader)?).into_response())
}

async fn phase1(
    State(s): State<SharedStore>,
    Path(id): Path<String>,
    Json(body): Json<Phase1Submission>,
) -> Result<Response, StudyError> {
    Ok(Json(s.lock().unwrap().submit_phase1(&id, body)?).into_response())
}

async fn phase2(
    State(s): State<SharedStore>,
    Path(id): Path<String>,
    Json(body): Json<Phase2Submission>,
) -> Result<Response, StudyError> {
    s.lock().unwrap().submit_phase2(&id, body)?;
    Ok(ok().into_response())
}

async fn skip(
    State(s): State<SharedStore>,
    Path(id): Path<String>,
    Json(body): Json<SkipSubmission>,
) -> Result<Response, StudyError> {
    s.lock().unwrap().skip(&id, &body.reader_id)?;
    Ok(ok().into_response())
}

async fn export(State(s): State<SharedStore>) -> Result<Response, StudyError> {
    let bundle = s.lock().unwrap().bundle().clone();
    Ok(Json(export_study(&bundle)?).into_response())
}

async fn progress(State(s): State<SharedStore>, Query(q): Query<ReaderQuery>) -> Result<Response, StudyError> {
    Ok(Json(s.lock().unwrap().progress(&q.reader)?).into_response())
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/api/cases/next", get(next_case))
        .route("/api/cases/{id}/phase1", post(phase1))
        .route("/api/cases/{id}/phase2", post(phase2))
        .route("/api/cases/{id}/skip", post(skip))
        .route("/api/export", get(export))
        .route("/api/progress", get(progress))
        .with_state(store)
}

/// Serves until the process is stopped. `on_bound` receives the bound address.
pub async fn serve(store: StudyStore, addr: SocketAddr, on_bound: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(Arc::new(Mutex::new(store)))).await
}
