//! Median detrending, top-share normalization and landmark selection.
//!
//! All series values are exact rationals. The detrended value of a year is
//! an integer or a half-integer (even-length windows average two counts), and
//! the normalized value multiplies it by `top_count / c_total`. Exact values
//! make the argmax invariant under scaling of the counts, which floating
//! point products would not guarantee.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::aggregate::YearBin;
use crate::patent::PatentId;

pub type Score = Ratio<i64>;

/// Half-width of the median window (five years centred on the focal year).
pub const WINDOW_RADIUS: usize = 2;

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("no year bins to build a spectrum from")]
    Empty,
    #[error("no year has a positive score")]
    NoPositivePeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Pcs,
    Rpys,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Pcs => "pcs",
            Mode::Rpys => "rpys",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pcs" => Ok(Mode::Pcs),
            "rpys" => Ok(Mode::Rpys),
            other => Err(format!("unknown mode {other:?}, expected pcs or rpys")),
        }
    }
}

pub fn score_to_f64(score: &Score) -> f64 {
    score.to_f64().unwrap_or(f64::NAN)
}

fn serialize_score<S: Serializer>(score: &Score, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(score_to_f64(score))
}

fn median_of_sorted(sorted: &[u64]) -> Score {
    let n = sorted.len();
    if n % 2 == 1 {
        Score::from_integer(sorted[n / 2] as i64)
    } else {
        Score::new((sorted[n / 2 - 1] + sorted[n / 2]) as i64, 2)
    }
}

/// Signed deviation of each count from the median of the surrounding
/// five-year window. Windows are truncated at the series ends. Series
/// shorter than three years have no meaningful window and detrend to zero.
pub fn detrend(c: &[u64]) -> Vec<Score> {
    let n = c.len();
    if n < 3 {
        return vec![Score::zero(); n];
    }
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(WINDOW_RADIUS);
            let hi = (t + WINDOW_RADIUS).min(n - 1);
            let mut window = c[lo..=hi].to_vec();
            window.sort_unstable();
            Score::from_integer(c[t] as i64) - median_of_sorted(&window)
        })
        .collect()
}

/// Scales each detrended value by the share of that year's citations held by
/// its most-cited patent. Years without a bin score zero.
pub fn normalize(f: &[Score], start_year: i32, bins: &BTreeMap<i32, YearBin>) -> Vec<Score> {
    f.iter()
        .enumerate()
        .map(|(i, value)| match bins.get(&(start_year + i as i32)) {
            Some(bin) => *value * Score::new(bin.top_count as i64, bin.c_total as i64),
            None => Score::zero(),
        })
        .collect()
}

pub fn chance_odds(unique_cited_count: u64) -> f64 {
    assert!(unique_cited_count >= 1, "chance odds need at least one reference");
    1.0 / unique_cited_count as f64
}

/// Contiguous year-indexed series. Gap years between the first and last
/// binned year are present with a zero count.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub start_year: i32,
    pub end_year: i32,
    pub bins: BTreeMap<i32, YearBin>,
    pub c: Vec<u64>,
    pub f: Vec<Score>,
    pub pcs: Vec<Score>,
    pub mode: Mode,
}

impl Spectrum {
    pub fn from_bins(bins: Vec<YearBin>, mode: Mode) -> Result<Self, SpectrumError> {
        let bins: BTreeMap<i32, YearBin> = bins.into_iter().map(|b| (b.year, b)).collect();
        let start_year = *bins.keys().next().ok_or(SpectrumError::Empty)?;
        let end_year = *bins.keys().next_back().ok_or(SpectrumError::Empty)?;
        let c: Vec<u64> = (start_year..=end_year)
            .map(|y| bins.get(&y).map_or(0, |b| b.c_total))
            .collect();
        let f = detrend(&c);
        let pcs = normalize(&f, start_year, &bins);
        Ok(Self {
            start_year,
            end_year,
            bins,
            c,
            f,
            pcs,
            mode,
        })
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start_year..=self.end_year
    }

    pub fn index_of(&self, year: i32) -> Option<usize> {
        (self.start_year..=self.end_year)
            .contains(&year)
            .then(|| (year - self.start_year) as usize)
    }

    /// The series the current mode ranks on.
    pub fn active(&self) -> &[Score] {
        match self.mode {
            Mode::Pcs => &self.pcs,
            Mode::Rpys => &self.f,
        }
    }

    pub fn score_at(&self, year: i32) -> Option<Score> {
        self.index_of(year).map(|i| self.active()[i])
    }

    /// Years whose active score is positive and a local maximum: strictly
    /// above the previous year and not below the next one. Sorted by score
    /// descending, earliest year first among equals.
    pub fn peaks(&self) -> Vec<Peak> {
        let s = self.active();
        let mut peaks: Vec<Peak> = (0..s.len())
            .filter(|&i| {
                s[i] > Score::zero()
                    && (i == 0 || s[i] > s[i - 1])
                    && (i + 1 == s.len() || s[i] >= s[i + 1])
            })
            .filter_map(|i| {
                let year = self.start_year + i as i32;
                let bin = self.bins.get(&year)?;
                Some(Peak {
                    year,
                    patent: bin.top_id.clone(),
                    top_count: bin.top_count,
                    score: s[i],
                })
            })
            .collect();
        peaks.sort_by(|a, b| b.score.cmp(&a.score).then(a.year.cmp(&b.year)));
        peaks
    }

    /// Year with the maximum positive active score, earliest on ties.
    pub fn argmax_year(&self) -> Option<i32> {
        let s = self.active();
        let mut best: Option<usize> = None;
        for (i, v) in s.iter().enumerate() {
            if *v > Score::zero() && best.is_none_or(|b| *v > s[b]) {
                best = Some(i);
            }
        }
        best.map(|i| self.start_year + i as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Peak {
    pub year: i32,
    pub patent: PatentId,
    pub top_count: u64,
    #[serde(serialize_with = "serialize_score")]
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandmarkResult {
    pub patent: PatentId,
    pub year: i32,
    #[serde(serialize_with = "serialize_score")]
    pub score: Score,
    pub mode: Mode,
    pub runner_up_years: Vec<Peak>,
    pub odds: f64,
}

/// Picks the most-cited patent of the best-scoring year in the spectrum's
/// active mode. `top_k` further peaks are returned as runners-up.
pub fn select_landmark(
    spectrum: &Spectrum,
    unique_cited_count: u64,
    top_k: usize,
) -> Result<LandmarkResult, SpectrumError> {
    let year = spectrum.argmax_year().ok_or(SpectrumError::NoPositivePeak)?;
    // A positive score implies c > 0, so the bin exists.
    let bin = &spectrum.bins[&year];
    let score = spectrum.score_at(year).expect("argmax year lies in range");
    let runner_up_years = spectrum
        .peaks()
        .into_iter()
        .filter(|p| p.year != year)
        .take(top_k)
        .collect();
    Ok(LandmarkResult {
        patent: bin.top_id.clone(),
        year,
        score,
        mode: spectrum.mode,
        runner_up_years,
        odds: chance_odds(unique_cited_count.max(1)),
    })
}
