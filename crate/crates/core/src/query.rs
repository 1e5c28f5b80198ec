//! Free-text search box parsing.
//!
//! A query is a comma-separated list of OR-combined clauses. A clause wrapped
//! in double quotes is an exact phrase; anything else is a keyword. Commas
//! inside quotes belong to the phrase.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query contains no search terms")]
    EmptyQuery,
    #[error("unterminated phrase starting at byte {0}")]
    UnterminatedPhrase(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseKind {
    Keyword,
    Phrase,
}

/// One OR branch of a query. Text is trimmed and case-preserved.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryClause {
    pub kind: ClauseKind,
    pub text: String,
}

impl QueryClause {
    pub fn keyword(text: impl Into<String>) -> Self {
        Self {
            kind: ClauseKind::Keyword,
            text: text.into(),
        }
    }

    pub fn phrase(text: impl Into<String>) -> Self {
        Self {
            kind: ClauseKind::Phrase,
            text: text.into(),
        }
    }

    fn same_as(&self, other: &QueryClause) -> bool {
        self.kind == other.kind && self.text.to_lowercase() == other.text.to_lowercase()
    }
}

impl fmt::Display for QueryClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ClauseKind::Keyword => f.write_str(&self.text),
            ClauseKind::Phrase => write!(f, "\"{}\"", self.text),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    clauses: Vec<QueryClause>,
    raw: String,
}

impl Query {
    pub fn parse(input: &str) -> Result<Self, QueryError> {
        parse_query(input)
    }

    pub fn clauses(&self) -> &[QueryClause] {
        &self.clauses
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// `k1, "p1", k2` form. Used as the cache key input.
    pub fn canonical(&self) -> String {
        self.clauses
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl PartialEq<str> for Query {
    fn eq(&self, other: &str) -> bool {
        self.canonical() == other
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

pub fn parse_query(input: &str) -> Result<Query, QueryError> {
    let mut clauses: Vec<QueryClause> = Vec::new();
    for segment in split_segments(input)? {
        let Some(clause) = segment_to_clause(&segment) else {
            continue;
        };
        if !clauses.iter().any(|c| c.same_as(&clause)) {
            clauses.push(clause);
        }
    }
    if clauses.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    Ok(Query {
        clauses,
        raw: input.to_string(),
    })
}

/// Split on commas that sit outside double quotes.
fn split_segments(input: &str) -> Result<Vec<String>, QueryError> {
    let mut segments = Vec::new();
    let mut current = String::new();
    let mut open_quote: Option<usize> = None;
    for (idx, ch) in input.char_indices() {
        match ch {
            '"' => {
                open_quote = match open_quote {
                    Some(_) => None,
                    None => Some(idx),
                };
                current.push(ch);
            }
            ',' if open_quote.is_none() => segments.push(std::mem::take(&mut current)),
            _ => current.push(ch),
        }
    }
    if let Some(start) = open_quote {
        return Err(QueryError::UnterminatedPhrase(start));
    }
    segments.push(current);
    Ok(segments)
}

fn segment_to_clause(segment: &str) -> Option<QueryClause> {
    let trimmed = segment.trim();
    if trimmed.is_empty() {
        return None;
    }
    let quoted = trimmed.len() >= 2
        && trimmed.starts_with('"')
        && trimmed.ends_with('"')
        && !trimmed[1..trimmed.len() - 1].contains('"');
    if quoted {
        let inner = trimmed[1..trimmed.len() - 1].trim();
        if inner.is_empty() {
            return None;
        }
        return Some(QueryClause::phrase(inner));
    }
    // Stray quotes in a bare segment (e.g. `foo "bar"`) carry no phrase meaning.
    let text = trimmed.replace('"', " ");
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if text.is_empty() {
        None
    } else {
        Some(QueryClause::keyword(text))
    }
}
