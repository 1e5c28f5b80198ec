//! Request construction and response decoding for a [`DialectProfile`].

use std::ops::RangeInclusive;

use chrono::NaiveDate;
use serde_json::{json, Map, Value};
use url::Url;

use super::dialect::{DialectProfile, HttpMethod};
use super::FetchError;
use crate::patent::{grant_year_from_date, CitedReference, CitingPatent, PatentId};
use crate::query::{ClauseKind, Query};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiRequest {
    pub method: HttpMethod,
    pub url: Url,
    pub body: Option<String>,
    pub headers: Vec<(String, String)>,
    pub page: u32,
    pub page_size: u32,
}

impl ApiRequest {
    /// One-based record numbers this page covers.
    pub fn record_range(&self) -> RangeInclusive<u64> {
        let first = (self.page as u64 - 1) * self.page_size as u64 + 1;
        first..=first + self.page_size as u64 - 1
    }

    /// Looks up a parameter in the URL query string or, for POST, the body.
    pub fn param(&self, name: &str) -> Option<String> {
        if let Some(body) = &self.body {
            let v: Value = serde_json::from_str(body).ok()?;
            return v.get(name).map(|p| p.to_string());
        }
        self.url
            .query_pairs()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.into_owned())
    }
}

/// The OR filter: every clause against both title and abstract.
pub fn filter_json(query: &Query, dialect: &DialectProfile) -> Value {
    let branches: Vec<Value> = query
        .clauses()
        .iter()
        .flat_map(|clause| {
            let op = match clause.kind {
                ClauseKind::Keyword => &dialect.keyword_operator,
                ClauseKind::Phrase => &dialect.phrase_operator,
            };
            [&dialect.title_field, &dialect.abstract_field]
                .into_iter()
                .map(move |field| json!({ op: { field: clause.text } }))
        })
        .collect();
    json!({ dialect.or_operator.as_str(): branches })
}

/// `base` with `endpoint` appended as path segments.
pub fn endpoint_url(base: &Url, endpoint: &str) -> Url {
    let mut url = base.clone();
    url.set_query(None);
    if let Ok(mut segments) = url.path_segments_mut() {
        segments.pop_if_empty();
        segments.extend(endpoint.split('/').filter(|s| !s.is_empty()));
    }
    url
}

/// Builds the request for one page. Pages are one-based.
///
/// Panics if `page` is zero or `page_size` is outside `1..=max_page_size`;
/// callers validate configuration first.
pub fn build_api_request(
    query: &Query,
    page: u32,
    page_size: u32,
    dialect: &DialectProfile,
    base_url: &Url,
) -> ApiRequest {
    assert!(page >= 1, "pages are one-based");
    assert!(
        (1..=dialect.max_page_size).contains(&page_size),
        "page size {page_size} outside 1..={}",
        dialect.max_page_size
    );

    let filter = filter_json(query, dialect);
    let fields = json!(dialect.requested_fields());
    let options = json!({ dialect.page_key.as_str(): page, dialect.per_page_key.as_str(): page_size });
    let sort = json!([{ dialect.id_field.as_str(): "asc" }]);

    let mut url = endpoint_url(base_url, &dialect.endpoint);

    let body = match dialect.method {
        HttpMethod::Get => {
            url.query_pairs_mut()
                .append_pair(&dialect.query_param, &filter.to_string())
                .append_pair(&dialect.fields_param, &fields.to_string())
                .append_pair(&dialect.options_param, &options.to_string())
                .append_pair(&dialect.sort_param, &sort.to_string());
            None
        }
        HttpMethod::Post => {
            let mut body = Map::new();
            body.insert(dialect.query_param.clone(), filter);
            body.insert(dialect.fields_param.clone(), fields);
            body.insert(dialect.options_param.clone(), options);
            body.insert(dialect.sort_param.clone(), sort);
            Some(Value::Object(body).to_string())
        }
    };

    ApiRequest {
        method: dialect.method,
        url,
        body,
        headers: vec![("Accept".into(), "application/json".into())],
        page,
        page_size,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPage {
    pub patents: Vec<CitingPatent>,
    pub total: u64,
    /// Cited entries skipped because the id could not be normalized.
    pub skipped_citations: u64,
}

fn mismatch(msg: impl Into<String>) -> FetchError {
    FetchError::ApiSchemaMismatch(msg.into())
}

fn as_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

pub fn decode_page(body: &str, dialect: &DialectProfile) -> Result<DecodedPage, FetchError> {
    let root: Value =
        serde_json::from_str(body).map_err(|e| mismatch(format!("response is not JSON: {e}")))?;
    let total = root
        .get(&dialect.total_key)
        .and_then(Value::as_u64)
        .ok_or_else(|| mismatch(format!("missing numeric `{}`", dialect.total_key)))?;
    let records = match root.get(&dialect.records_key) {
        Some(Value::Array(items)) => items.as_slice(),
        // The legacy API answers `"patents": null` for an empty result.
        Some(Value::Null) => &[],
        _ => return Err(mismatch(format!("missing array `{}`", dialect.records_key))),
    };

    let mut skipped = 0;
    let mut patents = Vec::with_capacity(records.len());
    for record in records {
        let raw_id = record
            .get(&dialect.id_field)
            .and_then(as_text)
            .ok_or_else(|| mismatch(format!("record lacks `{}`", dialect.id_field)))?;
        let id = PatentId::parse(&raw_id).map_err(|e| mismatch(e.to_string()))?;
        let raw_date = record
            .get(&dialect.date_field)
            .and_then(Value::as_str)
            .ok_or_else(|| mismatch(format!("patent {id} lacks `{}`", dialect.date_field)))?;
        let grant_date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|_| mismatch(format!("patent {id} has bad date {raw_date:?}")))?;
        let title = record
            .get(&dialect.record_title_field)
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();

        let cited_raw = match record.get(&dialect.cited_list_key) {
            Some(Value::Array(items)) => items.as_slice(),
            Some(Value::Null) | None => &[],
            Some(_) => {
                return Err(mismatch(format!(
                    "patent {id}: `{}` is not an array",
                    dialect.cited_list_key
                )))
            }
        };
        let mut cited = Vec::with_capacity(cited_raw.len());
        for entry in cited_raw {
            // An all-null entry is how the legacy API spells "no citations".
            let Some(raw) = entry.get(&dialect.cited_id_field).and_then(as_text) else {
                continue;
            };
            match PatentId::parse(&raw) {
                Ok(cited_id) => cited.push(CitedReference {
                    cited_id,
                    grant_year: grant_year_from_date(
                        entry.get(&dialect.cited_date_field).and_then(Value::as_str),
                    ),
                }),
                Err(_) => {
                    log::debug!("patent {id}: skipping unparseable cited number {raw:?}");
                    skipped += 1;
                }
            }
        }
        patents.push(CitingPatent::new(id, title, grant_date, cited));
    }

    Ok(DecodedPage {
        patents,
        total,
        skipped_citations: skipped,
    })
}

/// Renders patents in the dialect's response shape. Used to replay a
/// recorded corpus through the same decoder the live path uses.
pub fn encode_page(patents: &[CitingPatent], total: u64, dialect: &DialectProfile) -> Value {
    let records: Vec<Value> = patents
        .iter()
        .map(|p| {
            let cited: Vec<Value> = if p.cited.is_empty() {
                vec![json!({ dialect.cited_id_field.as_str(): null, dialect.cited_date_field.as_str(): null })]
            } else {
                p.cited
                    .iter()
                    .map(|r| {
                        json!({
                            dialect.cited_id_field.as_str(): r.cited_id.to_string(),
                            dialect.cited_date_field.as_str():
                                r.grant_year.map(|y| format!("{y:04}-01-01")),
                        })
                    })
                    .collect()
            };
            json!({
                dialect.id_field.as_str(): p.id.to_string(),
                dialect.date_field.as_str(): p.grant_date.format("%Y-%m-%d").to_string(),
                dialect.record_title_field.as_str(): p.title,
                dialect.cited_list_key.as_str(): cited,
            })
        })
        .collect();
    json!({
        dialect.records_key.as_str(): if records.is_empty() { Value::Null } else { Value::Array(records) },
        "count": patents.len(),
        dialect.total_key.as_str(): total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn legacy() -> DialectProfile {
        DialectProfile::patentsview_legacy()
    }

    fn filter_of(req: &ApiRequest) -> Value {
        serde_json::from_str(&req.param("q").unwrap()).unwrap()
    }

    #[test]
    fn single_keyword_matches_title_or_abstract() {
        let q = parse_query("cholesterol").unwrap();
        let req = build_api_request(&q, 1, 1000, &legacy(), &Url::parse("https://api.patentsview.org").unwrap());
        assert_eq!(req.url.path(), "/patents/query");
        assert_eq!(
            filter_of(&req),
            json!({"_or": [
                {"_text_all": {"patent_title": "cholesterol"}},
                {"_text_all": {"patent_abstract": "cholesterol"}},
            ]})
        );
        let options: Value = serde_json::from_str(&req.param("o").unwrap()).unwrap();
        assert_eq!(options, json!({"page": 1, "per_page": 1000}));
        let fields: Value = serde_json::from_str(&req.param("f").unwrap()).unwrap();
        assert_eq!(
            fields,
            json!(["patent_number", "patent_date", "patent_title", "cited_patent_number", "cited_patent_date"])
        );
    }

    #[test]
    fn four_clauses_make_eight_branches() {
        let q = parse_query(r#"RNAi, "interference RNA", siRNA, "RNA interference""#).unwrap();
        let req = build_api_request(&q, 1, 1000, &legacy(), &Url::parse("https://api.patentsview.org/").unwrap());
        let f = filter_of(&req);
        let branches = f["_or"].as_array().unwrap();
        assert_eq!(branches.len(), 8);
        assert_eq!(branches[2], json!({"_text_phrase": {"patent_title": "interference RNA"}}));
        assert_eq!(branches[3], json!({"_text_phrase": {"patent_abstract": "interference RNA"}}));
    }

    #[test]
    fn pagination_arithmetic() {
        let q = parse_query("x").unwrap();
        let req = build_api_request(&q, 3, 500, &legacy(), &Url::parse("http://localhost:9").unwrap());
        assert_eq!(req.record_range(), 1001..=1500);
        let options: Value = serde_json::from_str(&req.param("o").unwrap()).unwrap();
        assert_eq!(options["page"], 3);
        assert_eq!(options["per_page"], 500);
    }

    #[test]
    fn post_dialect_puts_parameters_in_body() {
        let mut d = legacy();
        d.method = HttpMethod::Post;
        let q = parse_query("x").unwrap();
        let req = build_api_request(&q, 2, 10, &d, &Url::parse("http://localhost:9/api/v1").unwrap());
        assert_eq!(req.url.as_str(), "http://localhost:9/api/v1/patents/query");
        assert!(req.url.query().is_none());
        let body: Value = serde_json::from_str(req.body.as_ref().unwrap()).unwrap();
        assert_eq!(body["o"], json!({"page": 2, "per_page": 10}));
    }

    #[test]
    #[should_panic]
    fn oversized_page_is_rejected() {
        let q = parse_query("x").unwrap();
        build_api_request(&q, 1, 1001, &legacy(), &Url::parse("http://localhost:9").unwrap());
    }

    #[test]
    fn decodes_legacy_response() {
        let body = r#"{
            "patents": [
                {"patent_number": "7056704", "patent_date": "2006-06-06",
                 "patent_title": "RNA interference mediating small RNA molecules",
                 "cited_patents": [
                    {"cited_patent_number": "6506559", "cited_patent_date": "2003-01-14"},
                    {"cited_patent_number": "6,506,559", "cited_patent_date": "2003-01-14"},
                    {"cited_patent_number": "RE37123", "cited_patent_date": null},
                    {"cited_patent_number": "garbage!", "cited_patent_date": "2001-01-01"}
                 ]},
                {"patent_number": "7000001", "patent_date": "2006-02-14",
                 "patent_title": "x",
                 "cited_patents": [{"cited_patent_number": null, "cited_patent_date": null}]}
            ],
            "count": 2,
            "total_patent_count": 2
        }"#;
        let page = decode_page(body, &legacy()).unwrap();
        assert_eq!(page.total, 2);
        assert_eq!(page.skipped_citations, 1);
        assert_eq!(page.patents[0].cited.len(), 2);
        assert_eq!(page.patents[0].cited[0].grant_year, Some(2003));
        assert_eq!(page.patents[0].cited[1].cited_id.to_string(), "RE37123");
        assert_eq!(page.patents[0].cited[1].grant_year, None);
        assert!(page.patents[1].cited.is_empty());
    }

    #[test]
    fn empty_result_is_null_records() {
        let page = decode_page(r#"{"patents": null, "count": 0, "total_patent_count": 0}"#, &legacy())
            .unwrap();
        assert!(page.patents.is_empty());
        assert_eq!(page.total, 0);
    }

    #[test]
    fn schema_mismatches() {
        let d = legacy();
        for body in [
            "not json",
            r#"{"patents": []}"#,
            r#"{"records": [], "total_patent_count": 0}"#,
            r#"{"patents": [{"patent_date": "2001-01-01"}], "total_patent_count": 1}"#,
            r#"{"patents": [{"patent_number": "1"}], "total_patent_count": 1}"#,
            r#"{"patents": [{"patent_number": "1", "patent_date": "01/02/2001"}], "total_patent_count": 1}"#,
        ] {
            assert!(
                matches!(decode_page(body, &d), Err(FetchError::ApiSchemaMismatch(_))),
                "{body}"
            );
        }
    }

    #[test]
    fn encode_then_decode_preserves_years() {
        let p = CitingPatent::new(
            PatentId::parse("9000000").unwrap(),
            "t".into(),
            NaiveDate::from_ymd_opt(2016, 3, 1).unwrap(),
            vec![
                CitedReference { cited_id: PatentId::parse("D512345").unwrap(), grant_year: Some(2005) },
                CitedReference { cited_id: PatentId::parse("6000000").unwrap(), grant_year: None },
            ],
        );
        let body = encode_page(std::slice::from_ref(&p), 1, &legacy()).to_string();
        let page = decode_page(&body, &legacy()).unwrap();
        assert_eq!(page.patents, vec![p]);
    }
}
