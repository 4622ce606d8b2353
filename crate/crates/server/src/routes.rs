use crate::error::{core, ApiError};
use crate::jobs::{Job, JobKind};
use crate::AppState;
use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use chrono::{DateTime, Utc};
use page_core::course::{parse_module, Course};
use page_core::evaluation::{
    aggregate_scores, corpus_stats, generate_report, score_questionnaire, QuestionnaireResponse, RankingRecord,
    ReportFormat, ReportInputs, Scale,
};
use page_core::pipeline::ServedModule;
use page_core::profile::{ConversationStatus, DialogueState, StudentProfile};
use page_core::storage::{validate_id, StorageError};
use page_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::sync::Arc;

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<AppState>>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload.map(|Json(v)| v).map_err(ApiError::from)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e.to_string()))?
        .map_err(ApiError::from)
}

fn check_id(id: &str) -> ApiResult<()> {
    validate_id(id).map_err(core)
}

// ---- dialogue sessions ----

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartSession {
    agent_name: Option<String>,
    session_id: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnRequest {
    message: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinalizeRequest {
    student_id: String,
}

fn turn_body(state: &DialogueState, reply: &str) -> Value {
    json!({
        "session_id": state.session_id,
        "reply": reply,
        "show_exit_button": state.show_exit_button,
        "conversation_status": state.conversation_status,
        "phase": state.phase,
    })
}

type SessionSlot = Arc<tokio::sync::Mutex<Option<DialogueState>>>;

fn session_slot(state: &AppState, id: &str) -> SessionSlot {
    let mut sessions = state.sessions.lock().expect("session table poisoned");
    sessions.entry(id.to_string()).or_default().clone()
}

/// Loads a session into its slot from storage if this process has not seen it.
fn hydrate(state: &AppState, id: &str, slot: &mut Option<DialogueState>) -> ApiResult<()> {
    if slot.is_none() {
        match state.pipeline.store().get::<DialogueState>(&["sessions"], id, "session") {
            Ok(s) => *slot = Some(s),
            Err(StorageError::NotFound { .. }) => return Err(ApiError::not_found(format!("session {id}"))),
            Err(e) => return Err(core(e)),
        }
    }
    Ok(())
}

pub async fn start_session(State(state): Shared, payload: Option<Json<StartSession>>) -> ApiResult<Response> {
    let req = payload.map(|Json(r)| r).unwrap_or_default();
    let id = req.session_id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
    check_id(&id)?;
    let agent = req.agent_name.unwrap_or_else(|| "Page".into());
    let slot = session_slot(&state, &id);
    let mut guard = slot.lock_owned().await;
    if guard.is_some() || state.pipeline.store().exists(&["sessions"], &id) {
        return Err(ApiError::new(StatusCode::CONFLICT, "conflict", format!("session {id} already exists")));
    }
    let (session, reply) = state.engine.start_session_with_id(id.clone(), &agent).map_err(core)?;
    state.pipeline.store().put(&["sessions"], &id, "session", &session).map_err(core)?;
    let out = turn_body(&session, &reply);
    *guard = Some(session);
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

pub async fn post_turn(
    State(state): Shared,
    Path(id): Path<String>,
    payload: Result<Json<TurnRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    check_id(&id)?;
    let req = body(payload)?;
    let slot = session_slot(&state, &id);
    let mut guard = slot.lock_owned().await;
    hydrate(&state, &id, &mut guard)?;
    let current = guard.clone().expect("hydrated");
    let app = state.clone();
    let reply = blocking(move || {
        let llm = app.pipeline.providers().llm.clone();
        let r = app.engine.advance(&current, &req.message, llm.as_ref())?;
        app.pipeline.store().put(&["sessions"], &r.state.session_id, "session", &r.state)?;
        Ok(r)
    })
    .await?;
    let out = turn_body(&reply.state, &reply.reply);
    *guard = Some(reply.state);
    Ok(Json(out))
}

pub async fn finalize(
    State(state): Shared,
    Path(id): Path<String>,
    payload: Result<Json<FinalizeRequest>, JsonRejection>,
) -> ApiResult<Response> {
    check_id(&id)?;
    let req = body(payload)?;
    check_id(&req.student_id)?;
    let slot = session_slot(&state, &id);
    let mut guard = slot.lock_owned().await;
    hydrate(&state, &id, &mut guard)?;
    let session = guard.clone().expect("hydrated");
    if session.conversation_status != ConversationStatus::CompletedAndGenerateProfile {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "conflict",
            format!("session is {}; only a completed session yields a profile", session.conversation_status.as_str()),
        ));
    }
    let app = state.clone();
    let profile = blocking(move || {
        let llm = app.pipeline.providers().llm.clone();
        let profile = app.summarizer.summarize(&req.student_id, &session.history, llm.as_ref())?;
        app.pipeline.store().save_profile(&profile)?;
        Ok(profile)
    })
    .await?;
    drop(guard);
    Ok((StatusCode::CREATED, profile_response(&profile)).into_response())
}

// ---- profiles ----

fn profile_response(profile: &StudentProfile) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], profile.to_json()).into_response()
}

pub async fn get_profile(State(state): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let profile = state.pipeline.load_profile(&id)?;
    Ok(profile_response(&profile))
}

pub async fn put_profile(State(state): Shared, Path(id): Path<String>, raw: Bytes) -> ApiResult<Response> {
    check_id(&id)?;
    let text = std::str::from_utf8(&raw).map_err(|_| ApiError::bad_request("invalid_request", "body is not UTF-8"))?;
    let profile = StudentProfile::from_json(text).map_err(core)?;
    if profile.student_id != id {
        return Err(ApiError::bad_request(
            "invalid_request",
            format!("body student_id {} does not match path {id}", profile.student_id),
        ));
    }
    state.pipeline.store().save_profile(&profile).map_err(core)?;
    Ok(profile_response(&profile))
}

// ---- courses, personalization, content ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleUpload {
    pub module_id: String,
    /// Module text in the course file format.
    pub text: String,
    #[serde(default)]
    pub elementary: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseUpload {
    pub course_id: String,
    #[serde(default)]
    pub title: Option<String>,
    pub modules: Vec<ModuleUpload>,
}

pub async fn post_course(
    State(state): Shared,
    payload: Result<Json<CourseUpload>, JsonRejection>,
) -> ApiResult<Response> {
    let upload = body(payload)?;
    check_id(&upload.course_id)?;
    if upload.modules.is_empty() {
        return Err(ApiError::bad_request("invalid_request", "course has no modules"));
    }
    let mut modules = Vec::with_capacity(upload.modules.len());
    for m in &upload.modules {
        check_id(&m.module_id)?;
        let origin = std::path::PathBuf::from(format!("{}/{}", upload.course_id, m.module_id));
        modules.push(parse_module(&upload.course_id, &m.module_id, &m.text, &m.elementary, &origin).map_err(core)?);
    }
    let course = Course {
        course_id: upload.course_id,
        title: upload.title,
        modules,
    };
    let app = state.clone();
    let summary = blocking(move || app.pipeline.save_course(&course)).await?;
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonalizeRequest {
    profile_id: String,
    module_id: String,
    #[serde(default)]
    kind: Option<JobKind>,
}

pub async fn post_personalize(
    State(state): Shared,
    payload: Result<Json<PersonalizeRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let req = body(payload)?;
    let kind = req.kind.unwrap_or(JobKind::Personalize);
    if kind == JobKind::Evaluate {
        return Err(ApiError::bad_request("invalid_request", "kind must be retrieve or personalize"));
    }
    state.pipeline.load_profile(&req.profile_id)?;
    state.pipeline.load_module(&req.module_id)?;
    let job = state
        .jobs
        .submit(kind, &req.profile_id, &req.module_id, state.pipeline.clock().as_ref())
        .await?;
    Ok((StatusCode::ACCEPTED, Json(job)).into_response())
}

pub async fn get_job(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Job>> {
    state
        .jobs
        .get(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("job {id}")))
}

pub async fn get_content(
    State(state): Shared,
    Path((profile_id, module_id)): Path<(String, String)>,
) -> ApiResult<Json<ServedModule>> {
    let app = state.clone();
    let served = blocking(move || {
        app.pipeline.load_profile(&profile_id)?;
        app.pipeline.served_content(&profile_id, &module_id)
    })
    .await?;
    Ok(Json(served))
}

// ---- telemetry ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TelemetryEvent {
    Opened,
    Completed,
    Navigated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionLog {
    pub student_id: String,
    pub segment_id: String,
    pub event: TelemetryEvent,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum TelemetryBatch {
    Many(Vec<SessionLog>),
    One(SessionLog),
}

/// Events are accepted only if every student's timestamps stay
/// non-decreasing, both within the batch and against what is stored.
pub async fn post_telemetry(
    State(state): Shared,
    payload: Result<Json<TelemetryBatch>, JsonRejection>,
) -> ApiResult<Response> {
    let events = match body(payload)? {
        TelemetryBatch::Many(v) => v,
        TelemetryBatch::One(e) => vec![e],
    };
    for e in &events {
        check_id(&e.student_id)?;
        if e.segment_id.trim().is_empty() {
            return Err(ApiError::bad_request("invalid_request", "segment_id must be non-empty"));
        }
    }
    let store = state.pipeline.store();
    let mut last = state.telemetry_last.lock().expect("telemetry table poisoned");
    let mut pending: BTreeMap<&str, DateTime<Utc>> = BTreeMap::new();
    for e in &events {
        let previous = match pending.get(e.student_id.as_str()) {
            Some(t) => Some(*t),
            None => match last.get(&e.student_id) {
                Some(t) => Some(*t),
                None => store
                    .read_lines::<SessionLog>(&["telemetry"], &e.student_id)
                    .map_err(core)?
                    .last()
                    .map(|l| l.timestamp),
            },
        };
        if previous.is_some_and(|p| e.timestamp < p) {
            return Err(ApiError::bad_request(
                "timestamp_regression",
                format!("telemetry for {} goes back in time at {}", e.student_id, e.timestamp.to_rfc3339()),
            ));
        }
        pending.insert(&e.student_id, e.timestamp);
    }
    for e in &events {
        store.append_line(&["telemetry"], &e.student_id, e).map_err(core)?;
        last.insert(e.student_id.clone(), e.timestamp);
    }
    Ok((StatusCode::CREATED, Json(json!({ "accepted": events.len() }))).into_response())
}

// ---- evaluation ----

const RANKINGS: &str = "rankings";
const QUESTIONNAIRE: &str = "questionnaire";

pub async fn post_rankings(
    State(state): Shared,
    payload: Result<Json<Vec<RankingRecord>>, JsonRejection>,
) -> ApiResult<Response> {
    let records = body(payload)?;
    if records.is_empty() {
        return Err(ApiError::bad_request("invalid_request", "no ranking records"));
    }
    for r in &records {
        r.validate().map_err(core)?;
    }
    let store = state.pipeline.store();
    for r in &records {
        store.append_line(&["eval"], RANKINGS, r).map_err(core)?;
    }
    Ok((StatusCode::CREATED, Json(json!({ "accepted": records.len() }))).into_response())
}

pub async fn post_questionnaire(
    State(state): Shared,
    payload: Result<Json<QuestionnaireResponse>, JsonRejection>,
) -> ApiResult<Response> {
    let response = body(payload)?;
    let cfg = &state.pipeline.config().evaluation;
    let scale = Scale {
        min: cfg.scale_min,
        max: cfg.scale_max,
    };
    response
        .validate(scale)
        .map_err(|m| ApiError::bad_request("validation_failed", m))?;
    state
        .pipeline
        .store()
        .append_line(&["eval"], QUESTIONNAIRE, &response)
        .map_err(core)?;
    Ok((StatusCode::CREATED, Json(response)).into_response())
}

#[derive(Debug, Default, Deserialize)]
pub struct ReportQuery {
    format: Option<String>,
}

pub async fn get_report(State(state): Shared, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let format: ReportFormat = q
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()
        .map_err(|e: page_core::evaluation::EvalError| ApiError::bad_request("invalid_request", e.to_string()))?;
    let app = state.clone();
    let rendered = blocking(move || {
        let p = &app.pipeline;
        let cfg = &p.config().evaluation;
        let rankings: Vec<RankingRecord> = p.store().read_lines(&["eval"], RANKINGS)?;
        let responses: Vec<QuestionnaireResponse> = p.store().read_lines(&["eval"], QUESTIONNAIRE)?;
        let manifest = p.corpus_manifest()?;
        let scores = if rankings.is_empty() {
            None
        } else {
            Some(aggregate_scores(&rankings, cfg.agreement_threshold)?)
        };
        let questionnaire = if responses.is_empty() {
            None
        } else {
            let scale = Scale {
                min: cfg.scale_min,
                max: cfg.scale_max,
            };
            Some(score_questionnaire(&responses, scale)?)
        };
        let corpus = (!manifest.is_empty()).then(|| corpus_stats(&manifest));
        Ok(generate_report(
            ReportInputs {
                scores: scores.as_ref(),
                questionnaire: questionnaire.as_ref(),
                corpus: corpus.as_ref(),
            },
            format,
        ))
    })
    .await?;
    let content_type = match format {
        ReportFormat::Json => "application/json",
        ReportFormat::Text => "text/plain; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], rendered).into_response())
}
