//! Paginated retrieval of matching patents and their backward citations.

pub mod dialect;
pub mod transport;
pub mod wire;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;
use url::Url;

pub use dialect::{DialectProfile, HttpMethod};
pub use transport::{HttpTransport, RawResponse, ReplayTransport, Transport, TransportError};
pub use wire::{build_api_request, decode_page, ApiRequest};

use crate::patent::FetchResult;
use crate::query::Query;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchError {
    #[error("patent API unreachable after {attempts} attempts: {last_error}")]
    ApiUnreachable { attempts: u32, last_error: String },
    #[error("patent API rejected the request with status {status}: {message}")]
    ApiRejected { status: u16, message: String },
    #[error("patent API response does not match the dialect: {0}")]
    ApiSchemaMismatch(String),
    #[error("{total} matching patents exceed the cap of {cap_pages} pages of {page_size}")]
    PageCapExceeded {
        total: u64,
        cap_pages: u32,
        page_size: u32,
    },
    #[error("invalid client configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub dialect: DialectProfile,
    pub base_url: Url,
    pub page_size: u32,
    pub page_cap: u32,
    pub retries: u32,
    pub retry_base_delay: Duration,
    pub inter_page_delay: Duration,
    pub timeout: Duration,
    pub api_key: Option<String>,
}

impl ClientConfig {
    pub fn new(dialect: DialectProfile) -> Self {
        let base_url = Url::parse(&dialect.base_url)
            .unwrap_or_else(|_| Url::parse("http://localhost/").expect("static url"));
        Self {
            base_url,
            page_size: dialect.max_page_size.min(1000),
            page_cap: 100,
            retries: 3,
            retry_base_delay: Duration::from_millis(500),
            inter_page_delay: Duration::from_millis(200),
            timeout: Duration::from_secs(60),
            api_key: None,
            dialect,
        }
    }

    pub fn validate(&self) -> Result<(), FetchError> {
        if self.page_size == 0 || self.page_size > self.dialect.max_page_size {
            return Err(FetchError::InvalidConfig(format!(
                "page size {} outside 1..={}",
                self.page_size, self.dialect.max_page_size
            )));
        }
        if self.page_cap == 0 {
            return Err(FetchError::InvalidConfig("page cap must be at least 1".into()));
        }
        if !matches!(self.base_url.scheme(), "http" | "https") {
            return Err(FetchError::InvalidConfig(format!(
                "base url {} is not http(s)",
                self.base_url
            )));
        }
        Ok(())
    }
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self::new(DialectProfile::default())
    }
}

fn retriable_status(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

fn snippet(body: &str) -> String {
    let line = body.lines().next().unwrap_or_default();
    line.chars().take(200).collect()
}

/// Fetches pages sequentially through a [`Transport`]. Cloning is cheap and
/// clones share the transport.
#[derive(Clone)]
pub struct PatentClient {
    config: ClientConfig,
    transport: Arc<dyn Transport>,
}

impl PatentClient {
    pub fn new(config: ClientConfig, transport: Arc<dyn Transport>) -> Result<Self, FetchError> {
        config.validate()?;
        Ok(Self { config, transport })
    }

    pub fn http(config: ClientConfig) -> Result<Self, FetchError> {
        let transport = HttpTransport::new(config.timeout);
        Self::new(config, Arc::new(transport))
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn request_for(&self, query: &Query, page: u32) -> ApiRequest {
        let mut request = build_api_request(
            query,
            page,
            self.config.page_size,
            &self.config.dialect,
            &self.config.base_url,
        );
        if let (Some(header), Some(key)) = (&self.config.dialect.api_key_header, &self.config.api_key)
        {
            request.headers.push((header.clone(), key.clone()));
        }
        request
    }

    /// Sends with up to `retries` extra attempts on transport failures, 429
    /// and 5xx, doubling the delay each time.
    fn send(&self, request: &ApiRequest) -> Result<String, FetchError> {
        let attempts = self.config.retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.retry_base_delay * 2u32.pow(attempt - 1));
            }
            match self.transport.execute(request) {
                Ok(resp) if (200..300).contains(&resp.status) => return Ok(resp.body),
                Ok(resp) if retriable_status(resp.status) => {
                    last_error = format!("status {}", resp.status);
                }
                Ok(resp) => {
                    return Err(FetchError::ApiRejected {
                        status: resp.status,
                        message: snippet(&resp.body),
                    })
                }
                Err(e) => last_error = e.0,
            }
            log::warn!(
                "page {} attempt {}/{} failed: {last_error}",
                request.page,
                attempt + 1,
                attempts
            );
        }
        Err(FetchError::ApiUnreachable {
            attempts,
            last_error,
        })
    }

    /// Retrieves every matching patent. Fails rather than truncating when the
    /// result set needs more than `page_cap` pages.
    pub fn fetch_all(&self, query: &Query) -> Result<FetchResult, FetchError> {
        let page_size = self.config.page_size;
        let mut result = FetchResult::empty(self.transport.source());
        let mut seen = HashSet::new();
        let mut skipped = 0u64;
        let mut page = 1u32;

        loop {
            let request = self.request_for(query, page);
            let body = self.send(&request)?;
            let decoded = decode_page(&body, &self.config.dialect)?;
            result.pages_fetched = page;
            skipped += decoded.skipped_citations;

            if page == 1 {
                result.total_reported = decoded.total;
                let needed = decoded.total.div_ceil(page_size as u64);
                if needed > self.config.page_cap as u64 {
                    return Err(FetchError::PageCapExceeded {
                        total: decoded.total,
                        cap_pages: self.config.page_cap,
                        page_size,
                    });
                }
            }

            let received = decoded.patents.len();
            for patent in decoded.patents {
                if seen.insert(patent.id.clone()) {
                    result.patents.push(patent);
                }
            }

            let done = received < page_size as usize
                || result.patents.len() as u64 >= result.total_reported;
            if done {
                break;
            }
            if page >= self.config.page_cap {
                return Err(FetchError::PageCapExceeded {
                    total: result.total_reported,
                    cap_pages: self.config.page_cap,
                    page_size,
                });
            }
            page += 1;
            if !self.config.inter_page_delay.is_zero() {
                std::thread::sleep(self.config.inter_page_delay);
            }
        }

        if skipped > 0 {
            log::warn!("skipped {skipped} cited entries with unparseable patent numbers");
        }
        Ok(result)
    }
}
