//! Wire types of the HTTP API and the mapping from pipeline errors to status
//! codes.

use axum::http::StatusCode;
use pcs_core::config::Settings;
use pcs_core::pipeline::{analyze, Acquired, PipelineError, YearRow};
use pcs_core::spectrum::SpectrumError;
use pcs_core::{DataSource, Mode, PatentId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SpectrumParams {
    pub q: Option<String>,
    pub mode: Option<String>,
    pub fixture: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandmarkRef {
    pub patent_id: PatentId,
    pub year: i32,
    pub document_url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl ErrorBody {
    pub fn new(error: impl Into<String>, message: impl ToString) -> Self {
        Self {
            error: error.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResponse {
    pub query: String,
    pub citing_count: u64,
    pub unique_cited_count: u64,
    pub years: Vec<YearRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landmark: Option<LandmarkRef>,
    pub mode: Mode,
    pub source: DataSource,
    pub api_snapshot_date: String,
    /// Set only when the spectrum has no positive peak.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

/// A finished request: status plus JSON body text.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub status: StatusCode,
    pub body: String,
}

impl Reply {
    pub fn error(status: StatusCode, body: ErrorBody) -> Self {
        Self {
            status,
            body: serde_json::to_string(&body).expect("error bodies serialize"),
        }
    }

    pub fn from_pipeline_error(e: &PipelineError) -> Self {
        Self::error(status_for(e), ErrorBody::new(e.code(), e))
    }
}

pub fn status_for(e: &PipelineError) -> StatusCode {
    match e.code() {
        "EmptyQuery" | "UnterminatedPhrase" | "FixtureQueryMismatch" | "MissingQuery" => {
            StatusCode::BAD_REQUEST
        }
        "UnknownFixture" => StatusCode::NOT_FOUND,
        "ApiUnreachable" | "ApiRejected" | "ApiSchemaMismatch" => StatusCode::BAD_GATEWAY,
        "PageCapExceeded" | "EmptyCorpus" | "NoPositivePeak" => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

pub fn parse_mode(raw: Option<&str>) -> Result<Mode, Reply> {
    match raw {
        None | Some("") => Ok(Mode::default()),
        Some(m) => m
            .parse()
            .map_err(|e: String| Reply::error(StatusCode::BAD_REQUEST, ErrorBody::new("InvalidMode", e))),
    }
}

/// Runs the analysis stages on acquired data and shapes the response.
pub fn respond(acquired: Acquired, mode: Mode, settings: &Settings) -> Reply {
    let analysis = match analyze(&acquired.fetch, mode, settings.top_k) {
        Ok(a) => a,
        Err(e) => return Reply::from_pipeline_error(&e),
    };
    let landmark = analysis.landmark.as_ref().ok().map(|l| LandmarkRef {
        patent_id: l.patent.clone(),
        year: l.year,
        document_url: settings.document_url(&l.patent),
    });
    let error = match &analysis.landmark {
        Err(e @ SpectrumError::NoPositivePeak) => Some(ErrorBody::new("NoPositivePeak", e)),
        _ => None,
    };
    let status = if error.is_some() {
        StatusCode::UNPROCESSABLE_ENTITY
    } else {
        StatusCode::OK
    };
    let response = SpectrumResponse {
        query: acquired.query,
        citing_count: analysis.stats.citing_count,
        unique_cited_count: analysis.stats.unique_cited_count,
        years: analysis.year_rows(settings),
        landmark,
        mode,
        source: acquired.fetch.source,
        api_snapshot_date: acquired.api_snapshot_date,
        error,
    };
    Reply {
        status,
        body: serde_json::to_string(&response).expect("responses serialize"),
    }
}
