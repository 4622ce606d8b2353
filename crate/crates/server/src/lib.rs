//! HTTP API under `/v1` over a [`Pipeline`]: profiling dialogue sessions,
//! profiles, course ingestion, personalization jobs, served content,
//! telemetry and evaluation data.

mod error;
mod jobs;
mod routes;

pub use error::ApiError;
pub use jobs::{Job, JobKind, JobQueue, JobStatus};
pub use routes::{CourseUpload, ModuleUpload, SessionLog, TelemetryEvent};

use axum::extract::{Request, State};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use chrono::{DateTime, Utc};
use page_core::pipeline::Pipeline;
use page_core::profile::{DialogueEngine, DialogueState, DialogueTemplates, ProfileSummarizer};
use std::collections::HashMap;
use std::sync::Arc;

pub const API_KEY_HEADER: &str = "x-api-key";

pub struct AppState {
    pipeline: Arc<Pipeline>,
    jobs: Arc<JobQueue>,
    engine: DialogueEngine,
    summarizer: ProfileSummarizer,
    sessions: std::sync::Mutex<HashMap<String, Arc<tokio::sync::Mutex<Option<DialogueState>>>>>,
    telemetry_last: std::sync::Mutex<HashMap<String, DateTime<Utc>>>,
    api_key: Option<String>,
}

impl AppState {
    /// Must be called inside a Tokio runtime: job workers start immediately.
    pub fn new(pipeline: Pipeline, api_key: Option<String>) -> Arc<Self> {
        let pipeline = Arc::new(pipeline);
        let cfg = pipeline.config();
        let templates = DialogueTemplates::default();
        let engine = DialogueEngine::new(templates.clone(), cfg.dialogue.clone(), pipeline.clock().clone());
        let summarizer = ProfileSummarizer {
            rules: cfg.dialogue.clone(),
            templates,
        };
        let jobs = JobQueue::start(pipeline.clone(), cfg.server.workers);
        Arc::new(Self {
            pipeline,
            jobs,
            engine,
            summarizer,
            sessions: std::sync::Mutex::new(HashMap::new()),
            telemetry_last: std::sync::Mutex::new(HashMap::new()),
            api_key,
        })
    }

    pub fn pipeline(&self) -> &Arc<Pipeline> {
        &self.pipeline
    }

    pub fn jobs(&self) -> &Arc<JobQueue> {
        &self.jobs
    }
}

async fn require_api_key(State(state): State<Arc<AppState>>, request: Request, next: Next) -> Response {
    if let Some(expected) = &state.api_key {
        let given = request.headers().get(API_KEY_HEADER).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return ApiError::new(axum::http::StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong API key")
                .into_response();
        }
    }
    next.run(request).await
}

pub fn router(state: Arc<AppState>) -> Router {
    let v1 = Router::new()
        .route("/sessions", post(routes::start_session))
        .route("/sessions/{id}/turns", post(routes::post_turn))
        .route("/sessions/{id}/finalize", post(routes::finalize))
        .route("/profiles/{id}", get(routes::get_profile).put(routes::put_profile))
        .route("/courses", post(routes::post_course))
        .route("/personalize", post(routes::post_personalize))
        .route("/jobs/{id}", get(routes::get_job))
        .route("/content/{profile_id}/{module_id}", get(routes::get_content))
        .route("/telemetry", post(routes::post_telemetry))
        .route("/eval/rankings", post(routes::post_rankings))
        .route("/eval/report", get(routes::get_report))
        .route("/eval/questionnaire", post(routes::post_questionnaire))
        .layer(middleware::from_fn_with_state(state.clone(), require_api_key));
    Router::new().nest("/v1", v1).with_state(state)
}

/// Binds and serves until Ctrl-C.
pub async fn serve(state: Arc<AppState>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
