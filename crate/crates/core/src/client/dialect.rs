use serde::{Deserialize, Serialize};

/// Wire-level description of a patent search API: where to send requests,
/// how to phrase the filter, and where the fields live in the response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DialectProfile {
    pub name: String,
    pub base_url: String,
    pub endpoint: String,
    pub method: HttpMethod,
    pub max_page_size: u32,
    /// Header that carries an API key, when the service wants one.
    pub api_key_header: Option<String>,

    pub query_param: String,
    pub fields_param: String,
    pub options_param: String,
    pub sort_param: String,
    pub page_key: String,
    pub per_page_key: String,

    pub or_operator: String,
    pub keyword_operator: String,
    pub phrase_operator: String,
    pub title_field: String,
    pub abstract_field: String,

    pub records_key: String,
    pub total_key: String,
    pub id_field: String,
    pub date_field: String,
    pub record_title_field: String,
    pub cited_list_key: String,
    pub cited_id_field: String,
    pub cited_date_field: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HttpMethod {
    Get,
    Post,
}

pub const LEGACY_PATENTSVIEW: &str = "patentsview-legacy";

impl DialectProfile {
    /// The pre-2020 PatentsView `patents/query` endpoint: JSON-encoded `q`,
    /// `f`, `o` and `s` parameters on a GET request.
    pub fn patentsview_legacy() -> Self {
        Self {
            name: LEGACY_PATENTSVIEW.into(),
            base_url: "https://api.patentsview.org".into(),
            endpoint: "patents/query".into(),
            method: HttpMethod::Get,
            max_page_size: 1000,
            api_key_header: None,
            query_param: "q".into(),
            fields_param: "f".into(),
            options_param: "o".into(),
            sort_param: "s".into(),
            page_key: "page".into(),
            per_page_key: "per_page".into(),
            or_operator: "_or".into(),
            keyword_operator: "_text_all".into(),
            phrase_operator: "_text_phrase".into(),
            title_field: "patent_title".into(),
            abstract_field: "patent_abstract".into(),
            records_key: "patents".into(),
            total_key: "total_patent_count".into(),
            id_field: "patent_number".into(),
            date_field: "patent_date".into(),
            record_title_field: "patent_title".into(),
            cited_list_key: "cited_patents".into(),
            cited_id_field: "cited_patent_number".into(),
            cited_date_field: "cited_patent_date".into(),
        }
    }

    pub fn named(name: &str) -> Option<Self> {
        match name {
            LEGACY_PATENTSVIEW | "legacy" => Some(Self::patentsview_legacy()),
            _ => None,
        }
    }

    pub fn known_names() -> &'static [&'static str] {
        &[LEGACY_PATENTSVIEW]
    }

    /// Fields requested from the API, in request order.
    pub fn requested_fields(&self) -> Vec<&str> {
        vec![
            &self.id_field,
            &self.date_field,
            &self.record_title_field,
            &self.cited_id_field,
            &self.cited_date_field,
        ]
    }
}

impl Default for DialectProfile {
    fn default() -> Self {
        Self::patentsview_legacy()
    }
}
