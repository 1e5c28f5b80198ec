//! Patent citation spectroscopy.
//!
//! Given a keyword/phrase search over US patent titles and abstracts, the
//! backward citations of the matching patents are binned by the grant year
//! of the cited patent. Each year's count is detrended against the median of
//! its five-year neighbourhood and then weighted by the share of that year's
//! citations going to its single most-cited patent. The most-cited patent of
//! the best-scoring year is reported as the landmark of the field.
//!
//! ```
//! use pcs_core::aggregate::aggregate;
//! use pcs_core::cache::FixtureSet;
//! use pcs_core::spectrum::{select_landmark, Mode, Spectrum};
//!
//! let entry = FixtureSet::bundled().load("rnai").unwrap();
//! let (bins, stats) = aggregate(&entry.payload).unwrap();
//! let spectrum = Spectrum::from_bins(bins, Mode::Pcs).unwrap();
//! let landmark = select_landmark(&spectrum, stats.unique_cited_count, 5).unwrap();
//! assert_eq!(landmark.patent.to_string(), "6506559");
//! ```

pub mod aggregate;
pub mod cache;
pub mod client;
pub mod config;
pub mod patent;
pub mod pipeline;
pub mod query;
pub mod spectrum;

pub use aggregate::{CorpusStats, YearBin};
pub use patent::{CitedReference, CitingPatent, DataSource, FetchResult, PatentId};
pub use query::{parse_query, Query, QueryClause};
pub use spectrum::{LandmarkResult, Mode, Spectrum};
