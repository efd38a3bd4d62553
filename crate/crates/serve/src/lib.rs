//! HTTP service for blinded adjudication sessions.
//!
//! Routes:
//!
//! * `GET /session/{id}/next`: the lowest-index unlabelled item, or a done marker;
//! * `POST /session/{id}/label`: submit one judgment;
//! * `GET /packet/{id}/progress`: per-session counts and agreement so far;
//! * `GET /packet/{id}/export`: per-annotator annotation files and the merged view.
//!
//! Labels are appended to a JSONL log and synced before they are
//! acknowledged; sessions are rebuilt from that log at startup.

mod store;

pub use store::{LabelLog, LogEntry, Session};

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use neicap::validate::{
    merge_consensus, AdjudicationLabel, AdjudicationRecord, AuditPacket, BlindedItem, Disagreement, Subtype,
    ValidateError,
};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;
use tokio::sync::Mutex;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("label log line {line}: {detail}")]
    Log { line: usize, detail: String },
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServeError {
    pub fn code(&self) -> &'static str {
        match self {
            ServeError::NotFound(_) => "not_found",
            ServeError::Conflict(_) => "conflict",
            ServeError::InvalidInput(_) => "invalid_input",
            _ => "internal",
        }
    }

    fn status(&self) -> StatusCode {
        match self {
            ServeError::NotFound(_) => StatusCode::NOT_FOUND,
            ServeError::Conflict(_) => StatusCode::CONFLICT,
            ServeError::InvalidInput(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServeError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code(), "message": self.to_string() } });
        (self.status(), Json(body)).into_response()
    }
}

/// A session to open at startup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSpec {
    pub session_id: String,
    pub annotator_id: String,
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub packet: AuditPacket,
    pub sessions: Vec<SessionSpec>,
    pub log_path: PathBuf,
}

/// Shared service state. The packet is immutable; each session has its own
/// lock, and the log has one more so appends never interleave.
#[derive(Debug)]
pub struct AppState {
    packet: AuditPacket,
    item_ids: Vec<String>,
    sessions: BTreeMap<String, Mutex<Session>>,
    log: Mutex<LabelLog>,
}

impl AppState {
    /// Opens the log and replays it into fresh sessions.
    pub fn open(config: ServeConfig) -> Result<Arc<Self>, ServeError> {
        let item_ids: Vec<String> = config.packet.items.iter().map(|i| i.item_id.clone()).collect();
        let mut sessions: BTreeMap<String, Session> = config
            .sessions
            .iter()
            .map(|s| (s.session_id.clone(), Session::new(&s.session_id, &s.annotator_id, &config.packet.packet_id)))
            .collect();
        let (log, entries) = LabelLog::open(&config.log_path)?;
        for (i, e) in entries.into_iter().enumerate() {
            if e.packet_id != config.packet.packet_id {
                continue;
            }
            let s = sessions.get_mut(&e.session_id).ok_or_else(|| ServeError::Log {
                line: i + 1,
                detail: format!("session {} is not configured", e.session_id),
            })?;
            if !item_ids.contains(&e.record.item_id) {
                return Err(ServeError::Log { line: i + 1, detail: format!("unknown item {}", e.record.item_id) });
            }
            s.submitted.entry(e.record.item_id.clone()).or_insert(e.record);
        }
        for s in sessions.values_mut() {
            s.advance(&item_ids);
        }
        Ok(Arc::new(AppState {
            packet: config.packet,
            item_ids,
            sessions: sessions.into_iter().map(|(k, v)| (k, Mutex::new(v))).collect(),
            log: Mutex::new(log),
        }))
    }

    fn session(&self, id: &str) -> Result<&Mutex<Session>, ServeError> {
        self.sessions.get(id).ok_or_else(|| ServeError::NotFound(format!("unknown session {id}")))
    }

    fn check_packet(&self, id: &str) -> Result<(), ServeError> {
        if id == self.packet.packet_id {
            Ok(())
        } else {
            Err(ServeError::NotFound(format!("unknown packet {id}")))
        }
    }

    async fn snapshots(&self) -> Vec<Session> {
        let mut out = Vec::with_capacity(self.sessions.len());
        for s in self.sessions.values() {
            out.push(s.lock().await.clone());
        }
        out
    }
}

#[derive(Debug, Serialize)]
struct ItemView<'a> {
    done: bool,
    item: &'a BlindedItem,
    position: usize,
    total: usize,
}

fn judgment_counts(s: &Session) -> BTreeMap<&'static str, usize> {
    let mut counts: BTreeMap<&'static str, usize> = AdjudicationLabel::ALL.iter().map(|l| (l.as_str(), 0)).collect();
    for r in s.submitted.values() {
        *counts.entry(r.label.as_str()).or_default() += 1;
    }
    counts
}

async fn next_item(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ServeError> {
    let s = state.session(&id)?.lock().await;
    let total = state.item_ids.len();
    if s.cursor >= total {
        let body = json!({ "done": true, "labeled": s.submitted.len(), "total": total, "counts": judgment_counts(&s) });
        return Ok(Json(body).into_response());
    }
    Ok(Json(ItemView { done: false, item: &state.packet.items[s.cursor], position: s.cursor, total }).into_response())
}

fn field<'a>(body: &'a Value, name: &str) -> Result<Option<&'a str>, ServeError> {
    match body.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(ServeError::InvalidInput(format!("{name} must be a string, got {other}"))),
    }
}

fn now_millis() -> String {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0).to_string()
}

async fn submit_label(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Value>, axum::extract::rejection::JsonRejection>,
) -> Result<Response, ServeError> {
    let Json(body) = body.map_err(|e| ServeError::InvalidInput(e.body_text()))?;
    let mut s = state.session(&id)?.lock().await;
    let item_id = field(&body, "item_id")?.ok_or_else(|| ServeError::InvalidInput("item_id is required".into()))?;
    let label_text = field(&body, "judgment")?.ok_or_else(|| ServeError::InvalidInput("judgment is required".into()))?;
    let label: AdjudicationLabel =
        label_text.parse().map_err(|e: neicap::manifest::ParseEnumError| ServeError::InvalidInput(e.to_string()))?;
    let subtype: Option<Subtype> = field(&body, "subtype")?
        .map(|t| t.parse().map_err(|e: neicap::manifest::ParseEnumError| ServeError::InvalidInput(e.to_string())))
        .transpose()?;
    if !state.item_ids.iter().any(|i| i == item_id) {
        return Err(ServeError::NotFound(format!("item {item_id} is not in packet {}", state.packet.packet_id)));
    }
    if s.submitted.contains_key(item_id) {
        return Err(ServeError::Conflict(format!("item {item_id} is already labelled in session {id}")));
    }
    let mut record = AdjudicationRecord::new(item_id, s.annotator_id.clone(), label, subtype);
    record.check().map_err(|e| ServeError::InvalidInput(e.to_string()))?;
    record.timestamp = now_millis();
    let entry = LogEntry { packet_id: state.packet.packet_id.clone(), session_id: id.clone(), record };
    state.log.lock().await.append(&entry)?;
    s.submitted.insert(entry.record.item_id.clone(), entry.record);
    s.advance(&state.item_ids);
    let body = json!({
        "accepted": true,
        "item_id": item_id,
        "progress": { "labeled": s.submitted.len(), "total": state.item_ids.len() },
    });
    Ok(Json(body).into_response())
}

/// Agreement figures as `merge_consensus` reports them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementView {
    pub n_items: usize,
    pub raw_agreement: f64,
    pub label_agreement: f64,
    pub binary_agreement: f64,
    pub disagreements: Vec<Disagreement>,
}

/// Merges the first two sessions over the items both have labelled.
fn agreement(sessions: &[Session]) -> Result<Option<AgreementView>, ServeError> {
    let [a, b, ..] = sessions else { return Ok(None) };
    let shared = |x: &Session, y: &Session| -> Vec<AdjudicationRecord> {
        x.submitted.values().filter(|r| y.submitted.contains_key(&r.item_id)).cloned().collect()
    };
    let (ra, rb) = (shared(a, b), shared(b, a));
    if ra.is_empty() {
        return Ok(None);
    }
    let out = merge_consensus(&ra, &rb, &[])?;
    Ok(Some(AgreementView {
        n_items: out.n_items,
        raw_agreement: out.raw_agreement,
        label_agreement: out.label_agreement,
        binary_agreement: out.binary_agreement,
        disagreements: out.disagreements,
    }))
}

async fn progress(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ServeError> {
    state.check_packet(&id)?;
    let sessions = state.snapshots().await;
    let per: Vec<Value> = sessions
        .iter()
        .map(|s| json!({ "session_id": s.session_id, "annotator_id": s.annotator_id, "labeled": s.submitted.len() }))
        .collect();
    let body = json!({
        "packet_id": id,
        "total": state.item_ids.len(),
        "sessions": per,
        "agreement": agreement(&sessions)?,
    });
    Ok(Json(body).into_response())
}

/// One annotator's records as an annotation file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatorExport {
    pub session_id: String,
    pub annotator_id: String,
    pub jsonl: String,
}

async fn export(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ServeError> {
    state.check_packet(&id)?;
    let sessions = state.snapshots().await;
    let annotators: Vec<AnnotatorExport> = sessions
        .iter()
        .map(|s| {
            let records: Vec<AdjudicationRecord> = s.submitted.values().cloned().collect();
            let mut buf = Vec::new();
            neicap::validate::write_annotations(&records, &mut buf).expect("writing to memory");
            AnnotatorExport {
                session_id: s.session_id.clone(),
                annotator_id: s.annotator_id.clone(),
                jsonl: String::from_utf8(buf).expect("JSON is UTF-8"),
            }
        })
        .collect();
    let body = json!({ "packet_id": id, "annotators": annotators, "merged": agreement(&sessions)? });
    Ok(Json(body).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/session/{id}/next", get(next_item))
        .route("/session/{id}/label", post(submit_label))
        .route("/packet/{id}/progress", get(progress))
        .route("/packet/{id}/export", get(export))
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(config: ServeConfig, addr: SocketAddr) -> Result<(), ServeError> {
    let state = AppState::open(config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await?;
    Ok(())
}
