use std::sync::OnceLock;
use std::time::Duration;

use thiserror::Error;

use super::dialect::{DialectProfile, HttpMethod};
use super::wire::{encode_page, ApiRequest};
use crate::patent::{DataSource, FetchResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

/// Executes one request. Implementations must not retry; the client does.
pub trait Transport: Send + Sync {
    fn execute(&self, request: &ApiRequest) -> Result<RawResponse, TransportError>;

    fn source(&self) -> DataSource {
        DataSource::Live
    }
}

/// `reqwest` hides the interesting part (refused, DNS, timeout) in the
/// source chain; the URL is dropped because the client logs the page.
fn describe(error: reqwest::Error) -> TransportError {
    let error = error.without_url();
    let mut text = error.to_string();
    let mut source = std::error::Error::source(&error);
    while let Some(cause) = source {
        text.push_str(": ");
        text.push_str(&cause.to_string());
        source = cause.source();
    }
    TransportError(text)
}

/// The underlying client is built on first use. A blocking `reqwest` client
/// cannot be created on an async executor thread, and requests only ever run
/// on blocking threads.
pub struct HttpTransport {
    timeout: Duration,
    client: OnceLock<Result<reqwest::blocking::Client, TransportError>>,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        Self {
            timeout,
            client: OnceLock::new(),
        }
    }

    fn client(&self) -> Result<&reqwest::blocking::Client, TransportError> {
        self.client
            .get_or_init(|| {
                reqwest::blocking::Client::builder()
                    .timeout(self.timeout)
                    .user_agent(concat!("pcs/", env!("CARGO_PKG_VERSION")))
                    .build()
                    .map_err(describe)
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

impl Transport for HttpTransport {
    fn execute(&self, request: &ApiRequest) -> Result<RawResponse, TransportError> {
        let client = self.client()?;
        let mut builder = match request.method {
            HttpMethod::Get => client.get(request.url.clone()),
            HttpMethod::Post => client
                .post(request.url.clone())
                .header("Content-Type", "application/json")
                .body(request.body.clone().unwrap_or_default()),
        };
        for (name, value) in &request.headers {
            builder = builder.header(name, value);
        }
        let response = builder.send().map_err(describe)?;
        let status = response.status().as_u16();
        let body = response.text().map_err(describe)?;
        Ok(RawResponse { status, body })
    }
}

/// Serves a recorded corpus page by page in the dialect's wire shape, so
/// replayed data goes through the same decoding and pagination as live data.
pub struct ReplayTransport {
    corpus: FetchResult,
    dialect: DialectProfile,
}

impl ReplayTransport {
    pub fn new(corpus: FetchResult, dialect: DialectProfile) -> Self {
        Self { corpus, dialect }
    }
}

impl Transport for ReplayTransport {
    fn execute(&self, request: &ApiRequest) -> Result<RawResponse, TransportError> {
        let total = self.corpus.patents.len() as u64;
        let range = request.record_range();
        let start = (*range.start() - 1).min(total) as usize;
        let end = (*range.end()).min(total) as usize;
        let body = encode_page(&self.corpus.patents[start..end], total, &self.dialect);
        Ok(RawResponse {
            status: 200,
            body: body.to_string(),
        })
    }

    fn source(&self) -> DataSource {
        DataSource::Fixture
    }
}
