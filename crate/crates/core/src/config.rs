//! Runtime settings: defaults, then an optional TOML file, then `PCS_*`
//! environment variables. Command-line flags are layered on top by the
//! binaries.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::client::{ClientConfig, DialectProfile};
use crate::patent::PatentId;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value {value:?} for {name}")]
    InvalidValue { name: String, value: String },
    #[error("unknown API dialect {0:?}")]
    UnknownDialect(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Overrides the dialect's default base URL.
    pub base_url: Option<String>,
    pub dialect: String,
    /// Full dialect description; takes precedence over `dialect`.
    pub dialect_profile: Option<DialectProfile>,
    pub page_size: u32,
    pub page_cap: u32,
    pub retries: u32,
    pub retry_base_delay_ms: u64,
    pub inter_page_delay_ms: u64,
    pub timeout_secs: u64,
    pub api_key: Option<String>,
    pub cache_dir: PathBuf,
    pub use_cache: bool,
    pub fixture_dir: PathBuf,
    /// `{id}` is replaced by the normalized patent number.
    pub document_url_template: String,
    pub top_k: usize,

    pub bind: String,
    pub port: u16,
    pub ui_dir: PathBuf,
    /// Live requests slower than this are turned into pollable jobs.
    pub async_threshold_ms: u64,
    pub cors_origins: Vec<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            base_url: None,
            dialect: crate::client::dialect::LEGACY_PATENTSVIEW.into(),
            dialect_profile: None,
            page_size: 1000,
            page_cap: 100,
            retries: 3,
            retry_base_delay_ms: 500,
            inter_page_delay_ms: 200,
            timeout_secs: 60,
            api_key: None,
            cache_dir: PathBuf::from(".pcs-cache"),
            use_cache: true,
            fixture_dir: Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"),
            document_url_template: "https://patents.google.com/patent/US{id}".into(),
            top_k: crate::spectrum::DEFAULT_TOP_K,
            bind: "127.0.0.1".into(),
            port: 8080,
            ui_dir: PathBuf::from("web/dist"),
            async_threshold_ms: 10_000,
            cors_origins: Vec::new(),
        }
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::InvalidValue {
        name: name.to_string(),
        value: value.to_string(),
    })
}

fn parse_bool(name: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" | "" => Ok(false),
        _ => Err(ConfigError::InvalidValue {
            name: name.into(),
            value: value.into(),
        }),
    }
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Defaults, then `config` (or `PCS_CONFIG`), then the process environment.
    pub fn load(config: Option<&Path>) -> Result<Self, ConfigError> {
        let env_path = std::env::var_os("PCS_CONFIG").map(PathBuf::from);
        let mut settings = match config.map(Path::to_path_buf).or(env_path) {
            Some(path) => Self::from_file(&path)?,
            None => Self::default(),
        };
        settings.apply_env(std::env::vars())?;
        Ok(settings)
    }

    /// Applies `PCS_*` overrides. Unrelated variables are ignored.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (name, value) in vars {
            let (name, value) = (name.as_ref(), value.as_ref());
            match name {
                "PCS_BASE_URL" => self.base_url = Some(value.to_string()),
                "PCS_DIALECT" => self.dialect = value.to_string(),
                "PCS_PAGE_SIZE" => self.page_size = parse_env(name, value)?,
                "PCS_PAGE_CAP" => self.page_cap = parse_env(name, value)?,
                "PCS_RETRIES" => self.retries = parse_env(name, value)?,
                "PCS_RETRY_BASE_DELAY_MS" => self.retry_base_delay_ms = parse_env(name, value)?,
                "PCS_INTER_PAGE_DELAY_MS" => self.inter_page_delay_ms = parse_env(name, value)?,
                "PCS_TIMEOUT_SECS" => self.timeout_secs = parse_env(name, value)?,
                "PCS_API_KEY" => self.api_key = Some(value.to_string()),
                "PCS_CACHE_DIR" => self.cache_dir = PathBuf::from(value),
                "PCS_NO_CACHE" => self.use_cache = !parse_bool(name, value)?,
                "PCS_FIXTURE_DIR" => self.fixture_dir = PathBuf::from(value),
                "PCS_DOCUMENT_URL_TEMPLATE" => self.document_url_template = value.to_string(),
                "PCS_TOP_K" => self.top_k = parse_env(name, value)?,
                "PCS_BIND" => self.bind = value.to_string(),
                "PCS_PORT" => self.port = parse_env(name, value)?,
                "PCS_UI_DIR" => self.ui_dir = PathBuf::from(value),
                "PCS_ASYNC_THRESHOLD_MS" => self.async_threshold_ms = parse_env(name, value)?,
                "PCS_CORS_ORIGINS" => {
                    self.cors_origins = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect()
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn dialect_profile(&self) -> Result<DialectProfile, ConfigError> {
        match &self.dialect_profile {
            Some(profile) => Ok(profile.clone()),
            None => DialectProfile::named(&self.dialect)
                .ok_or_else(|| ConfigError::UnknownDialect(self.dialect.clone())),
        }
    }

    pub fn client_config(&self) -> Result<ClientConfig, ConfigError> {
        let dialect = self.dialect_profile()?;
        let raw_url = self.base_url.clone().unwrap_or_else(|| dialect.base_url.clone());
        let base_url = Url::parse(&raw_url).map_err(|_| ConfigError::InvalidValue {
            name: "base_url".into(),
            value: raw_url.clone(),
        })?;
        let mut config = ClientConfig::new(dialect);
        config.base_url = base_url;
        config.page_size = self.page_size;
        config.page_cap = self.page_cap;
        config.retries = self.retries;
        config.retry_base_delay = Duration::from_millis(self.retry_base_delay_ms);
        config.inter_page_delay = Duration::from_millis(self.inter_page_delay_ms);
        config.timeout = Duration::from_secs(self.timeout_secs);
        config.api_key = self.api_key.clone();
        config.validate().map_err(|e| ConfigError::InvalidValue {
            name: "client".into(),
            value: e.to_string(),
        })?;
        Ok(config)
    }

    pub fn document_url(&self, id: &PatentId) -> String {
        self.document_url_template.replace("{id}", &id.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pcs.toml");
        std::fs::write(&path, "page_size = 500\nport = 9000\ncache_dir = \"/tmp/a\"\n").unwrap();
        let mut s = Settings::from_file(&path).unwrap();
        assert_eq!(s.page_size, 500);
        s.apply_env([
            ("PCS_PORT", "9100"),
            ("PCS_NO_CACHE", "1"),
            ("PCS_CORS_ORIGINS", "http://a, http://b"),
            ("HOME", "/root"),
        ])
        .unwrap();
        assert_eq!(s.port, 9100);
        assert_eq!(s.page_size, 500);
        assert!(!s.use_cache);
        assert_eq!(s.cors_origins, vec!["http://a", "http://b"]);
        assert_eq!(s.cache_dir, PathBuf::from("/tmp/a"));
    }

    #[test]
    fn bad_values_are_reported() {
        let mut s = Settings::default();
        assert!(matches!(
            s.apply_env([("PCS_PAGE_SIZE", "lots")]),
            Err(ConfigError::InvalidValue { .. })
        ));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pcs.toml");
        std::fs::write(&path, "no_such_setting = 1\n").unwrap();
        assert!(matches!(Settings::from_file(&path), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn client_config_from_settings() {
        let mut s = Settings {
            base_url: Some("http://127.0.0.1:9999/v0".into()),
            page_size: 250,
            ..Settings::default()
        };
        let c = s.client_config().unwrap();
        assert_eq!(c.page_size, 250);
        assert_eq!(c.base_url.as_str(), "http://127.0.0.1:9999/v0");
        s.dialect = "nope".into();
        assert!(matches!(s.client_config(), Err(ConfigError::UnknownDialect(_))));
        let s = Settings {
            page_size: 5000,
            ..Settings::default()
        };
        assert!(s.client_config().is_err());
    }

    #[test]
    fn document_url_template() {
        let s = Settings::default();
        let id = PatentId::parse("US6,506,559").unwrap();
        assert_eq!(s.document_url(&id), "https://patents.google.com/patent/US6506559");
    }

    #[test]
    fn dialect_profile_from_toml() {
        let text = r#"
            [dialect_profile]
            name = "custom"
            base_url = "http://localhost:1"
            method = "post"
        "#;
        let s: Settings = toml::from_str(text).unwrap();
        let d = s.dialect_profile().unwrap();
        assert_eq!(d.name, "custom");
        assert_eq!(d.method, crate::client::HttpMethod::Post);
        assert_eq!(d.records_key, "patents");
    }
}
