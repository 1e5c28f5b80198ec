//! HTTP service for citation spectra, plus the static web UI.
//!
//! `GET /api/spectrum?q=..&mode=pcs|rpys[&fixture=..]` answers synchronously
//! unless a live fetch outlasts the configured threshold, in which case the
//! request turns into a job (`202`, poll `GET /api/jobs/{id}`). Jobs can also
//! be submitted directly with `POST /api/jobs`.

pub mod api;
pub mod jobs;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use pcs_core::cache::{CacheStore, Writability};
use pcs_core::config::Settings;
use pcs_core::pipeline::{Pipeline, PipelineError, SourceRequest};
use pcs_core::{parse_query, Mode};
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use api::{parse_mode, respond, ErrorBody, Reply, SpectrumParams};
use jobs::{envelope, JobState, Jobs};

#[derive(Clone)]
pub struct AppState {
    settings: Arc<Settings>,
    pipeline: Pipeline,
    jobs: Arc<Jobs>,
}

impl AppState {
    pub fn new(settings: Settings, pipeline: Pipeline) -> Self {
        Self {
            settings: Arc::new(settings),
            pipeline,
            jobs: Arc::new(Jobs::default()),
        }
    }

    pub fn from_settings(settings: Settings) -> Result<Self, PipelineError> {
        let pipeline = Pipeline::from_settings(&settings)?;
        Ok(Self::new(settings, pipeline))
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }
}

/// A validated spectrum request, ready to run off the async executor.
struct Prepared {
    query: Option<pcs_core::Query>,
    source: SourceRequest,
    mode: Mode,
}

fn prepare(state: &AppState, params: &SpectrumParams) -> Result<Prepared, Reply> {
    let mode = parse_mode(params.mode.as_deref())?;
    let query = params
        .q
        .as_deref()
        .map(parse_query)
        .transpose()
        .map_err(|e| Reply::from_pipeline_error(&e.into()))?;
    let source = match params.fixture.as_deref() {
        Some(name) if !name.is_empty() => SourceRequest::Fixture(name.to_string()),
        _ => SourceRequest::Network {
            use_cache: state.settings.use_cache,
        },
    };
    if query.is_none() && matches!(source, SourceRequest::Network { .. }) {
        return Err(Reply::from_pipeline_error(&PipelineError::MissingQuery));
    }
    Ok(Prepared { query, source, mode })
}

impl Prepared {
    fn needs_upstream(&self, pipeline: &Pipeline) -> bool {
        match (&self.source, &self.query) {
            (SourceRequest::Network { use_cache }, Some(q)) => !use_cache || !pipeline.is_cached(q),
            _ => false,
        }
    }

    fn run(self, state: &AppState) -> Reply {
        match state.pipeline.acquire(self.query.as_ref(), &self.source) {
            Ok(acquired) => respond(acquired, self.mode, &state.settings),
            Err(e) => Reply::from_pipeline_error(&e),
        }
    }
}

fn spawn_run(state: &AppState, prepared: Prepared) -> tokio::task::JoinHandle<Reply> {
    let state = state.clone();
    tokio::task::spawn_blocking(move || prepared.run(&state))
}

fn joined(result: Result<Reply, tokio::task::JoinError>) -> Reply {
    result.unwrap_or_else(|e| {
        log::error!("spectrum task failed: {e}");
        Reply::error(
            StatusCode::INTERNAL_SERVER_ERROR,
            ErrorBody::new("Internal", "spectrum computation failed"),
        )
    })
}

fn json_response(status: StatusCode, body: String) -> Response {
    let generated_at = chrono::Utc::now().to_rfc3339();
    let mut response = (status, [(header::CONTENT_TYPE, "application/json")], body).into_response();
    if let Ok(value) = HeaderValue::from_str(&generated_at) {
        response.headers_mut().insert("x-generated-at", value);
    }
    response
}

fn reply_response(reply: Reply) -> Response {
    json_response(reply.status, reply.body)
}

fn accepted(state: &AppState, task: tokio::task::JoinHandle<Reply>) -> Response {
    let id = state.jobs.create();
    let jobs = state.jobs.clone();
    tokio::spawn(async move {
        let reply = joined(task.await);
        jobs.finish(id, reply);
    });
    let mut response = json_response(StatusCode::ACCEPTED, envelope(id, &JobState::Running));
    if let Ok(location) = HeaderValue::from_str(&jobs::status_url(id)) {
        response.headers_mut().insert(header::LOCATION, location);
    }
    response
}

async fn spectrum(State(state): State<AppState>, Query(params): Query<SpectrumParams>) -> Response {
    let prepared = match prepare(&state, &params) {
        Ok(p) => p,
        Err(reply) => return reply_response(reply),
    };
    let slow_path = prepared.needs_upstream(&state.pipeline);
    let mut task = spawn_run(&state, prepared);
    if !slow_path {
        return reply_response(joined(task.await));
    }
    let threshold = Duration::from_millis(state.settings.async_threshold_ms);
    match tokio::time::timeout(threshold, &mut task).await {
        Ok(result) => reply_response(joined(result)),
        Err(_) => accepted(&state, task),
    }
}

async fn submit_job(State(state): State<AppState>, Json(params): Json<SpectrumParams>) -> Response {
    match prepare(&state, &params) {
        Ok(prepared) => {
            let task = spawn_run(&state, prepared);
            accepted(&state, task)
        }
        Err(reply) => reply_response(reply),
    }
}

async fn poll_job(State(state): State<AppState>, Path(id): Path<u64>) -> Response {
    match state.jobs.get(id) {
        Some(job) => json_response(StatusCode::OK, envelope(id, &job)),
        None => reply_response(Reply::error(
            StatusCode::NOT_FOUND,
            ErrorBody::new("UnknownJob", format!("no job {id}")),
        )),
    }
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
    dialect: String,
    cache: &'static str,
}

async fn health(State(state): State<AppState>) -> Response {
    let cache = match state.pipeline.cache() {
        None => "disabled",
        Some(store) => match store.writability() {
            Writability::Writable => "writable",
            Writability::ReadOnly => "read-only",
            Writability::Missing => "missing",
        },
    };
    let body = Health {
        status: if matches!(cache, "writable" | "disabled") {
            "ok"
        } else {
            "degraded"
        },
        version: env!("CARGO_PKG_VERSION"),
        dialect: state.pipeline.dialect().to_string(),
        cache,
    };
    json_response(StatusCode::OK, serde_json::to_string(&body).expect("health serializes"))
}

async fn api_not_found(uri: Uri) -> Response {
    reply_response(Reply::error(
        StatusCode::NOT_FOUND,
        ErrorBody::new("NotFound", format!("no route {}", uri.path())),
    ))
}

const FALLBACK_PAGE: &str = r#"<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>Patent citation spectroscopy</title></head>
<body>
<h1>Patent citation spectroscopy</h1>
<p>The web UI bundle is not installed. The API is available:</p>
<ul>
<li><a href="/api/health">/api/health</a></li>
<li><a href="/api/spectrum?fixture=rnai">/api/spectrum?fixture=rnai</a></li>
<li><a href="/api/spectrum?fixture=cholesterol&amp;mode=rpys">/api/spectrum?fixture=cholesterol&amp;mode=rpys</a></li>
</ul>
</body>
</html>
"#;

async fn ui_fallback(uri: Uri) -> Response {
    match uri.path() {
        "/" | "/index.html" => Html(FALLBACK_PAGE).into_response(),
        _ => (StatusCode::NOT_FOUND, "not found\n").into_response(),
    }
}

fn cors_layer(origins: &[String]) -> Option<CorsLayer> {
    let allowed: Vec<HeaderValue> = origins
        .iter()
        .filter_map(|o| match HeaderValue::from_str(o) {
            Ok(v) => Some(v),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin {o:?}");
                None
            }
        })
        .collect();
    if allowed.is_empty() {
        return None;
    }
    Some(
        CorsLayer::new()
            .allow_origin(AllowOrigin::list(allowed))
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([header::CONTENT_TYPE]),
    )
}

pub fn router(state: AppState) -> Router {
    let ui_dir: PathBuf = state.settings.ui_dir.clone();
    let static_files = ServeDir::new(ui_dir).fallback(get(ui_fallback));
    let mut app = Router::new()
        .route("/api/spectrum", get(spectrum))
        .route("/api/jobs", post(submit_job))
        .route("/api/jobs/{id}", get(poll_job))
        .route("/api/health", get(health))
        .route("/api", any(api_not_found))
        .route("/api/{*rest}", any(api_not_found))
        .fallback_service(static_files);
    if let Some(cors) = cors_layer(&state.settings.cors_origins) {
        app = app.layer(cors);
    }
    app.with_state(state)
}

/// Creates the cache directory up front so health reflects reality.
pub fn prepare_cache_dir(settings: &Settings) {
    if settings.use_cache {
        if let Err(e) = CacheStore::open(&settings.cache_dir) {
            log::warn!("cache unavailable: {e}");
        }
    }
}
