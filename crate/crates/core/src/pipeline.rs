//! Query → fetch (fixture, cache or live) → aggregate → spectrum → landmark.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::aggregate::{aggregate, AggregateError, CorpusStats};
use crate::cache::{CacheEntry, CacheError, CacheKey, CacheStore, FixtureError, FixtureSet};
use crate::client::{FetchError, PatentClient, Transport};
use crate::config::{ConfigError, Settings};
use crate::patent::{FetchResult, PatentId};
use crate::query::{parse_query, Query, QueryError};
use crate::spectrum::{
    score_to_f64, select_landmark, LandmarkResult, Mode, Spectrum, SpectrumError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("a query is required unless a fixture is given")]
    MissingQuery,
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("query {requested:?} does not match fixture query {recorded:?}")]
    FixtureQueryMismatch { requested: String, recorded: String },
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

impl From<FixtureError> for PipelineError {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Unknown(name) => PipelineError::UnknownFixture(name),
            FixtureError::Cache(c) => PipelineError::Cache(c),
        }
    }
}

impl PipelineError {
    /// Stable machine-readable name of the error class.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Query(QueryError::EmptyQuery) => "EmptyQuery",
            PipelineError::Query(QueryError::UnterminatedPhrase(_)) => "UnterminatedPhrase",
            PipelineError::MissingQuery => "MissingQuery",
            PipelineError::UnknownFixture(_) => "UnknownFixture",
            PipelineError::FixtureQueryMismatch { .. } => "FixtureQueryMismatch",
            PipelineError::Fetch(FetchError::ApiUnreachable { .. }) => "ApiUnreachable",
            PipelineError::Fetch(FetchError::ApiRejected { .. }) => "ApiRejected",
            PipelineError::Fetch(FetchError::ApiSchemaMismatch(_)) => "ApiSchemaMismatch",
            PipelineError::Fetch(FetchError::PageCapExceeded { .. }) => "PageCapExceeded",
            PipelineError::Fetch(FetchError::InvalidConfig(_)) | PipelineError::Config(_) => {
                "InvalidConfig"
            }
            PipelineError::Cache(CacheError::CorruptEntry { .. }) => "CorruptEntry",
            PipelineError::Cache(_) => "CacheError",
            PipelineError::Aggregate(AggregateError::EmptyCorpus) => "EmptyCorpus",
            PipelineError::Spectrum(SpectrumError::Empty) => "EmptyCorpus",
            PipelineError::Spectrum(SpectrumError::NoPositivePeak) => "NoPositivePeak",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceRequest {
    Fixture(String),
    Network { use_cache: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Acquired {
    /// Canonical query the data answers.
    pub query: String,
    pub fetch: FetchResult,
    pub api_snapshot_date: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModePeak {
    pub year: i32,
    pub patent: PatentId,
    pub score: f64,
}

/// Where the unnormalized and normalized series put their maxima.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeComparison {
    pub pcs: Option<ModePeak>,
    pub rpys: Option<ModePeak>,
    pub agree: bool,
}

impl ModeComparison {
    pub fn of(spectrum: &Spectrum) -> Self {
        let peak = |mode: Mode| {
            let s = spectrum.with_mode(mode);
            let year = s.argmax_year()?;
            Some(ModePeak {
                year,
                patent: s.bins[&year].top_id.clone(),
                score: score_to_f64(&s.score_at(year)?),
            })
        };
        let pcs = peak(Mode::Pcs);
        let rpys = peak(Mode::Rpys);
        let agree = match (&pcs, &rpys) {
            (Some(a), Some(b)) => a.year == b.year,
            (None, None) => true,
            _ => false,
        };
        Self { pcs, rpys, agree }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub stats: CorpusStats,
    pub spectrum: Spectrum,
    /// `Err(NoPositivePeak)` keeps the spectrum available for display.
    pub landmark: Result<LandmarkResult, SpectrumError>,
    pub comparison: ModeComparison,
}

/// One year of the spectrum in display form. Gap years carry no patent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearRow {
    pub year: i32,
    pub c_total: u64,
    pub f_value: f64,
    pub pcs_value: f64,
    pub top_patent_id: Option<PatentId>,
    pub top_patent_count: Option<u64>,
    pub document_url: Option<String>,
}

impl Analysis {
    pub fn year_rows(&self, settings: &Settings) -> Vec<YearRow> {
        let s = &self.spectrum;
        s.years()
            .enumerate()
            .map(|(i, year)| {
                let bin = s.bins.get(&year);
                YearRow {
                    year,
                    c_total: s.c[i],
                    f_value: score_to_f64(&s.f[i]),
                    pcs_value: score_to_f64(&s.pcs[i]),
                    top_patent_id: bin.map(|b| b.top_id.clone()),
                    top_patent_count: bin.map(|b| b.top_count),
                    document_url: bin.map(|b| settings.document_url(&b.top_id)),
                }
            })
            .collect()
    }
}

pub fn analyze(fetch: &FetchResult, mode: Mode, top_k: usize) -> Result<Analysis, PipelineError> {
    let (bins, stats) = aggregate(fetch)?;
    let spectrum = Spectrum::from_bins(bins, mode)?;
    let landmark = select_landmark(&spectrum, stats.unique_cited_count, top_k);
    let comparison = ModeComparison::of(&spectrum);
    Ok(Analysis {
        stats,
        spectrum,
        landmark,
        comparison,
    })
}

fn same_query(a: &Query, b: &Query) -> bool {
    a.canonical().to_lowercase() == b.canonical().to_lowercase()
}

/// Resolves data sources for queries. Shared by the CLI and the service.
#[derive(Clone)]
pub struct Pipeline {
    client: PatentClient,
    cache: Option<CacheStore>,
    fixtures: FixtureSet,
    dialect: String,
}

impl Pipeline {
    pub fn from_settings(settings: &Settings) -> Result<Self, PipelineError> {
        let config = settings.client_config()?;
        let client = PatentClient::http(config)?;
        Ok(Self::new(
            client,
            settings.use_cache.then(|| CacheStore::new(&settings.cache_dir)),
            FixtureSet::new(&settings.fixture_dir),
        ))
    }

    pub fn with_transport(
        settings: &Settings,
        transport: Arc<dyn Transport>,
    ) -> Result<Self, PipelineError> {
        let client = PatentClient::new(settings.client_config()?, transport)?;
        Ok(Self::new(
            client,
            settings.use_cache.then(|| CacheStore::new(&settings.cache_dir)),
            FixtureSet::new(&settings.fixture_dir),
        ))
    }

    pub fn new(client: PatentClient, cache: Option<CacheStore>, fixtures: FixtureSet) -> Self {
        let dialect = client.config().dialect.name.clone();
        Self {
            client,
            cache,
            fixtures,
            dialect,
        }
    }

    pub fn cache(&self) -> Option<&CacheStore> {
        self.cache.as_ref()
    }

    pub fn fixtures(&self) -> &FixtureSet {
        &self.fixtures
    }

    pub fn dialect(&self) -> &str {
        &self.dialect
    }

    pub fn cache_key(&self, query: &Query) -> CacheKey {
        CacheKey::for_query(query, &self.dialect, self.client.config().page_size)
    }

    /// Whether a network request for `query` would be answered without
    /// touching the upstream API.
    pub fn is_cached(&self, query: &Query) -> bool {
        self.cache
            .as_ref()
            .is_some_and(|c| c.path_for(&self.cache_key(query)).is_file())
    }

    pub fn acquire(
        &self,
        query: Option<&Query>,
        source: &SourceRequest,
    ) -> Result<Acquired, PipelineError> {
        match source {
            SourceRequest::Fixture(name) => {
                let entry = self.fixtures.load(name)?;
                if let Some(query) = query {
                    let recorded = parse_query(&entry.query)?;
                    if !same_query(query, &recorded) {
                        return Err(PipelineError::FixtureQueryMismatch {
                            requested: query.canonical(),
                            recorded: entry.query,
                        });
                    }
                }
                Ok(Acquired {
                    query: entry.query,
                    fetch: entry.payload,
                    api_snapshot_date: entry.api_snapshot_date,
                })
            }
            SourceRequest::Network { use_cache } => {
                let query = query.ok_or(PipelineError::MissingQuery)?;
                let cache = self.cache.as_ref().filter(|_| *use_cache);
                let key = self.cache_key(query);
                if let Some(cache) = cache {
                    match cache.get(&key) {
                        Ok(Some(mut entry)) => {
                            entry.payload.source = crate::patent::DataSource::Cache;
                            return Ok(Acquired {
                                query: entry.query,
                                fetch: entry.payload,
                                api_snapshot_date: entry.api_snapshot_date,
                            });
                        }
                        Ok(None) => {}
                        Err(e) => log::warn!("{e}; refetching"),
                    }
                }

                let fetch = self.client.fetch_all(query)?;
                let snapshot = chrono::Utc::now().date_naive().to_string();
                if let Some(cache) = cache {
                    let entry = CacheEntry::new(
                        query,
                        &self.dialect,
                        self.client.config().page_size,
                        snapshot.clone(),
                        fetch.clone(),
                    );
                    if let Err(e) = cache.put(&entry) {
                        log::warn!("could not cache result: {e}");
                    }
                }
                Ok(Acquired {
                    query: query.canonical(),
                    fetch,
                    api_snapshot_date: snapshot,
                })
            }
        }
    }
}
