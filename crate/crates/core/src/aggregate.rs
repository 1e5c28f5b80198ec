//! Per-year citation bins.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::patent::{FetchResult, PatentId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("no citing patent has a dated reference")]
    EmptyCorpus,
}

/// All citation pairs landing on patents granted in one year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearBin {
    pub year: i32,
    pub c_total: u64,
    pub counts: BTreeMap<PatentId, u64>,
    pub top_id: PatentId,
    pub top_count: u64,
}

impl YearBin {
    /// Returns `None` for an empty count map.
    pub fn from_counts(year: i32, counts: BTreeMap<PatentId, u64>) -> Option<Self> {
        let counts: BTreeMap<_, _> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        // BTreeMap iterates ascending, so the first maximum is the smallest id.
        let (top_id, top_count) = counts.iter().fold(None, |best, (id, &n)| match best {
            Some((_, m)) if m >= n => best,
            _ => Some((id, n)),
        })?;
        let top_id = top_id.clone();
        Some(Self {
            year,
            c_total: counts.values().sum(),
            top_id,
            top_count,
            counts,
        })
    }

    /// Share of the year's citations going to its most-cited patent, in (0, 1].
    pub fn top_share(&self) -> f64 {
        self.top_count as f64 / self.c_total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub citing_count: u64,
    pub unique_cited_count: u64,
    pub dropped_unknown_year: u64,
}

/// Bins every citing→cited pair by the cited patent's grant year. Bins come
/// back sorted ascending by year; undated references are only tallied.
pub fn aggregate(fetch: &FetchResult) -> Result<(Vec<YearBin>, CorpusStats), AggregateError> {
    let mut per_year: BTreeMap<i32, BTreeMap<PatentId, u64>> = BTreeMap::new();
    let mut unique: HashSet<&PatentId> = HashSet::new();
    let mut dropped = 0u64;

    for patent in &fetch.patents {
        for reference in &patent.cited {
            unique.insert(&reference.cited_id);
            match reference.grant_year {
                Some(year) => {
                    *per_year
                        .entry(year)
                        .or_default()
                        .entry(reference.cited_id.clone())
                        .or_default() += 1;
                }
                None => dropped += 1,
            }
        }
    }

    if per_year.is_empty() {
        return Err(AggregateError::EmptyCorpus);
    }

    let bins = per_year
        .into_iter()
        .filter_map(|(year, counts)| YearBin::from_counts(year, counts))
        .collect();
    let stats = CorpusStats {
        citing_count: fetch.patents.len() as u64,
        unique_cited_count: unique.len() as u64,
        dropped_unknown_year: dropped,
    };
    Ok((bins, stats))
}
