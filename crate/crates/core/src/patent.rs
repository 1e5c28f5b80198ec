//! Patent identifiers and the records returned by a patent search.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Earliest year a US patent can have been granted.
pub const FIRST_GRANT_YEAR: i32 = 1790;

/// Document-type prefixes that may precede the serial digits.
const PREFIXES: &[&str] = &["AI", "PP", "RE", "RX", "D", "H", "T", "X"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid patent number {0:?}")]
pub struct InvalidPatentId(pub String);

/// Normalized US patent number: no `US` prefix, no commas, no kind code, no
/// leading zeros. Design/plant/reissue numbers keep their letter prefix
/// (`D512345`, `PP12345`, `RE37123`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatentId {
    prefix: &'static str,
    serial: u64,
}

impl PatentId {
    pub fn parse(raw: &str) -> Result<Self, InvalidPatentId> {
        let err = || InvalidPatentId(raw.to_string());
        let cleaned: String = raw
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '-' | '/' | '\t'))
            .collect::<String>()
            .to_ascii_uppercase();
        let mut rest = cleaned.strip_prefix("US").unwrap_or(&cleaned);

        let letters = rest.chars().take_while(char::is_ascii_alphabetic).count();
        let prefix = if letters == 0 {
            ""
        } else {
            *PREFIXES
                .iter()
                .find(|p| p.len() == letters && rest.starts_with(**p))
                .ok_or_else(err)?
        };
        rest = &rest[prefix.len()..];

        let digits = rest.chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            return Err(err());
        }
        let (serial, kind) = rest.split_at(digits);
        if !is_kind_code(kind) {
            return Err(err());
        }
        let serial: u64 = serial.parse().map_err(|_| err())?;
        if serial == 0 {
            return Err(err());
        }
        Ok(Self { prefix, serial })
    }

    pub fn prefix(&self) -> &str {
        self.prefix
    }

    pub fn serial(&self) -> u64 {
        self.serial
    }

    pub fn is_utility(&self) -> bool {
        self.prefix.is_empty()
    }
}

/// Kind codes such as `A`, `B1`, `B2`, `E`, `S`, `P2`.
fn is_kind_code(s: &str) -> bool {
    let b = s.as_bytes();
    match b.len() {
        0 => true,
        1 => b[0].is_ascii_alphabetic(),
        2 => b[0].is_ascii_alphabetic() && b[1].is_ascii_digit(),
        _ => false,
    }
}

impl fmt::Display for PatentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.prefix, self.serial)
    }
}

impl FromStr for PatentId {
    type Err = InvalidPatentId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Utility patents sort numerically ahead of prefixed documents; prefixed
/// documents sort by prefix, then numerically.
impl Ord for PatentId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prefix
            .cmp(other.prefix)
            .then(self.serial.cmp(&other.serial))
    }
}

impl PartialOrd for PatentId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for PatentId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PatentId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        PatentId::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Reference grant year; `None` means the source gave no usable date.
pub type GrantYear = Option<i32>;

pub fn plausible_year(year: i32) -> bool {
    let current = chrono::Utc::now().year();
    (FIRST_GRANT_YEAR..=current).contains(&year)
}

/// Extracts a plausible grant year from a `YYYY-MM-DD` (or bare `YYYY`)
/// string. Anything else maps to unknown.
pub fn grant_year_from_date(raw: Option<&str>) -> GrantYear {
    let raw = raw?.trim();
    let year = if let Ok(date) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        date.year()
    } else if raw.len() == 4 {
        raw.parse().ok()?
    } else {
        return None;
    };
    plausible_year(year).then_some(year)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedReference {
    pub cited_id: PatentId,
    pub grant_year: GrantYear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitingPatent {
    pub id: PatentId,
    pub title: String,
    pub grant_date: NaiveDate,
    pub cited: Vec<CitedReference>,
}

impl CitingPatent {
    /// Builds a patent, collapsing repeated citations of the same id. When
    /// the copies disagree on the year, the first known year wins.
    pub fn new(
        id: PatentId,
        title: String,
        grant_date: NaiveDate,
        cited: impl IntoIterator<Item = CitedReference>,
    ) -> Self {
        let mut out: Vec<CitedReference> = Vec::new();
        for reference in cited {
            match out.iter_mut().find(|r| r.cited_id == reference.cited_id) {
                Some(existing) => {
                    if existing.grant_year.is_none() {
                        existing.grant_year = reference.grant_year;
                    }
                }
                None => out.push(reference),
            }
        }
        Self {
            id,
            title,
            grant_date,
            cited: out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Live,
    Cache,
    Fixture,
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataSource::Live => "live",
            DataSource::Cache => "cache",
            DataSource::Fixture => "fixture",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchResult {
    pub patents: Vec<CitingPatent>,
    pub total_reported: u64,
    pub pages_fetched: u32,
    pub source: DataSource,
}

impl FetchResult {
    pub fn empty(source: DataSource) -> Self {
        Self {
            patents: Vec::new(),
            total_reported: 0,
            pages_fetched: 0,
            source,
        }
    }

    /// Checks the structural invariants: unique citing ids, unique cited ids
    /// per patent, and at least one page when there are patents.
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for p in &self.patents {
            if !seen.insert(&p.id) {
                return Err(format!("duplicate citing patent {}", p.id));
            }
            let mut cited = HashSet::new();
            for r in &p.cited {
                if !cited.insert(&r.cited_id) {
                    return Err(format!("patent {} cites {} twice", p.id, r.cited_id));
                }
                if let Some(y) = r.grant_year {
                    if !plausible_year(y) {
                        return Err(format!("implausible grant year {y} for {}", r.cited_id));
                    }
                }
            }
        }
        if !self.patents.is_empty() && self.pages_fetched == 0 {
            return Err("patents present but no pages fetched".into());
        }
        Ok(())
    }

    pub fn unique_cited(&self) -> HashSet<&PatentId> {
        self.patents
            .iter()
            .flat_map(|p| p.cited.iter().map(|r| &r.cited_id))
            .collect()
    }

    pub fn citation_pairs(&self) -> usize {
        self.patents.iter().map(|p| p.cited.len()).sum()
    }
}
