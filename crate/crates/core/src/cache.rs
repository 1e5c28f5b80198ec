//! On-disk store of fetch results, one self-describing JSON file per entry.
//!
//! ```text
//! {
//!   "format": "pcs-cache",
//!   "format_version": 1,
//!   "key": "<sha256 hex>",
//!   "query": "RNAi, \"interference RNA\"",
//!   "dialect": "patentsview-legacy",
//!   "page_size": 1000,
//!   "created_at": "...",
//!   "api_snapshot_date": "...",
//!   "checksum": "sha256:<hex of the compact payload>",
//!   "payload": { ...FetchResult... }
//! }
//! ```
//!
//! Fixtures share the format and are read through [`read_entry`].

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::patent::{DataSource, FetchResult};
use crate::query::Query;

pub const FORMAT_NAME: &str = "pcs-cache";
pub const FORMAT_VERSION: u32 = 1;
pub const EXTENSION: &str = "pcs-cache";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("corrupt cache entry {path}: {reason}")]
    CorruptEntry { path: PathBuf, reason: String },
    #[error("no space left writing {0}")]
    StorageFull(PathBuf),
    #[error("permission denied writing {0}")]
    PermissionDenied(PathBuf),
    #[error("entry rejected: {0}")]
    InvalidEntry(String),
    #[error("cache i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CacheError {
    fn io(path: &Path, source: io::Error) -> Self {
        match source.kind() {
            io::ErrorKind::PermissionDenied | io::ErrorKind::ReadOnlyFilesystem => {
                CacheError::PermissionDenied(path.to_path_buf())
            }
            io::ErrorKind::StorageFull | io::ErrorKind::QuotaExceeded => {
                CacheError::StorageFull(path.to_path_buf())
            }
            _ => CacheError::Io {
                path: path.to_path_buf(),
                source,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn new(canonical_query: &str, dialect: &str, page_size: u32) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(format!("v{FORMAT_VERSION}\n{canonical_query}\n{dialect}\n{page_size}"));
        Self(hex::encode(hasher.finalize()))
    }

    pub fn for_query(query: &Query, dialect: &str, page_size: u32) -> Self {
        Self::new(&query.canonical(), dialect, page_size)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn is_well_formed(s: &str) -> bool {
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_hexdigit())
    }
}

impl fmt::Display for CacheKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub query: String,
    pub dialect: String,
    pub page_size: u32,
    pub created_at: DateTime<Utc>,
    pub api_snapshot_date: String,
    pub payload: FetchResult,
}

impl CacheEntry {
    pub fn new(
        query: &Query,
        dialect: &str,
        page_size: u32,
        api_snapshot_date: impl Into<String>,
        payload: FetchResult,
    ) -> Self {
        Self {
            key: CacheKey::for_query(query, dialect, page_size),
            query: query.canonical(),
            dialect: dialect.to_string(),
            page_size,
            created_at: Utc::now(),
            api_snapshot_date: api_snapshot_date.into(),
            payload,
        }
    }

    pub fn validate(&self) -> Result<(), CacheError> {
        if !CacheKey::is_well_formed(self.key.as_str()) {
            return Err(CacheError::InvalidEntry(format!("malformed key {:?}", self.key.0)));
        }
        self.payload.validate().map_err(CacheError::InvalidEntry)
    }
}

#[derive(Serialize, Deserialize)]
struct OnDisk {
    format: String,
    format_version: u32,
    key: CacheKey,
    query: String,
    dialect: String,
    page_size: u32,
    created_at: DateTime<Utc>,
    api_snapshot_date: String,
    checksum: String,
    payload: FetchResult,
}

fn payload_checksum(payload: &FetchResult) -> String {
    let bytes = serde_json::to_vec(payload).expect("fetch results always serialize");
    format!("sha256:{}", hex::encode(Sha256::digest(&bytes)))
}

pub fn encode(entry: &CacheEntry) -> String {
    let disk = OnDisk {
        format: FORMAT_NAME.into(),
        format_version: FORMAT_VERSION,
        key: entry.key.clone(),
        query: entry.query.clone(),
        dialect: entry.dialect.clone(),
        page_size: entry.page_size,
        created_at: entry.created_at,
        api_snapshot_date: entry.api_snapshot_date.clone(),
        checksum: payload_checksum(&entry.payload),
        payload: entry.payload.clone(),
    };
    let mut text = serde_json::to_string_pretty(&disk).expect("cache entries always serialize");
    text.push('\n');
    text
}

/// Parses and verifies an encoded entry. The error string describes why the
/// text is not a valid entry.
pub fn decode(text: &str) -> Result<CacheEntry, String> {
    let disk: OnDisk = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if disk.format != FORMAT_NAME {
        return Err(format!("unexpected format {:?}", disk.format));
    }
    if disk.format_version != FORMAT_VERSION {
        return Err(format!("unsupported format version {}", disk.format_version));
    }
    let actual = payload_checksum(&disk.payload);
    if actual != disk.checksum {
        return Err(format!("checksum mismatch: stored {}, computed {actual}", disk.checksum));
    }
    Ok(CacheEntry {
        key: disk.key,
        query: disk.query,
        dialect: disk.dialect,
        page_size: disk.page_size,
        created_at: disk.created_at,
        api_snapshot_date: disk.api_snapshot_date,
        payload: disk.payload,
    })
}

pub fn read_entry(path: &Path) -> Result<Option<CacheEntry>, CacheError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) if e.kind() == io::ErrorKind::InvalidData => {
            return Err(CacheError::CorruptEntry {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
        }
        Err(e) => return Err(CacheError::io(path, e)),
    };
    decode(&text).map(Some).map_err(|reason| CacheError::CorruptEntry {
        path: path.to_path_buf(),
        reason,
    })
}

/// Writes `contents` to `path` through a sibling temp file and a rename, so
/// readers see either the old file or the new one.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CacheError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::Builder::new()
        .prefix(".pcs-")
        .suffix(".tmp")
        .tempfile_in(dir)
        .map_err(|e| CacheError::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CacheError::io(path, e))?;
    tmp.persist(path).map_err(|e| CacheError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Writability {
    Writable,
    ReadOnly,
    Missing,
}

#[derive(Debug, Clone)]
pub struct CacheStore {
    dir: PathBuf,
}

impl CacheStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Creates the directory if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let store = Self::new(dir);
        fs::create_dir_all(&store.dir).map_err(|e| CacheError::io(&store.dir, e))?;
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{key}.{EXTENSION}"))
    }

    /// Looks at the directory's permission bits rather than probing with a
    /// write, so the answer is the same for privileged users.
    pub fn writability(&self) -> Writability {
        match fs::metadata(&self.dir) {
            Ok(m) if !m.is_dir() => Writability::Missing,
            Ok(m) if m.permissions().readonly() => Writability::ReadOnly,
            Ok(_) => Writability::Writable,
            Err(_) => Writability::Missing,
        }
    }

    pub fn get(&self, key: &CacheKey) -> Result<Option<CacheEntry>, CacheError> {
        read_entry(&self.path_for(key))
    }

    pub fn put(&self, entry: &CacheEntry) -> Result<(), CacheError> {
        entry.validate()?;
        let path = self.path_for(&entry.key);
        match self.writability() {
            Writability::ReadOnly => return Err(CacheError::PermissionDenied(self.dir.clone())),
            Writability::Missing => {
                fs::create_dir_all(&self.dir).map_err(|e| CacheError::io(&self.dir, e))?
            }
            Writability::Writable => {}
        }
        write_atomic(&path, &encode(entry))
    }

    pub fn keys(&self) -> Result<Vec<CacheKey>, CacheError> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(CacheError::io(&self.dir, e)),
        };
        let mut keys: Vec<CacheKey> = entries
            .filter_map(Result::ok)
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let stem = name.strip_suffix(&format!(".{EXTENSION}"))?;
                CacheKey::is_well_formed(stem).then(|| CacheKey(stem.to_string()))
            })
            .collect();
        keys.sort();
        Ok(keys)
    }

    /// Removes every entry; returns how many were deleted.
    pub fn clear(&self) -> Result<usize, CacheError> {
        let keys = self.keys()?;
        for key in &keys {
            let path = self.path_for(key);
            fs::remove_file(&path).map_err(|e| CacheError::io(&path, e))?;
        }
        Ok(keys.len())
    }
}

/// Named, committed cache entries replayed in tests and demos.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    dir: PathBuf,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

impl FixtureSet {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Fixtures shipped with this crate.
    pub fn bundled() -> Self {
        Self::new(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.{EXTENSION}"))
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = fs::read_dir(&self.dir)
            .into_iter()
            .flatten()
            .filter_map(Result::ok)
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(&format!(".{EXTENSION}")).map(str::to_string)
            })
            .collect();
        names.sort();
        names
    }

    /// Loads a fixture by name; the payload is marked as fixture-sourced.
    pub fn load(&self, name: &str) -> Result<CacheEntry, FixtureError> {
        let valid = !name.is_empty()
            && name
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
        if !valid {
            return Err(FixtureError::Unknown(name.to_string()));
        }
        let mut entry =
            read_entry(&self.path_for(name))?.ok_or_else(|| FixtureError::Unknown(name.into()))?;
        entry.payload.source = DataSource::Fixture;
        Ok(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patent::{CitedReference, CitingPatent, PatentId};
    use crate::query::parse_query;
    use chrono::NaiveDate;
    use std::os::unix::fs::PermissionsExt;
    use std::sync::Arc;

    fn sample(n: u64) -> FetchResult {
        FetchResult {
            patents: (0..n)
                .map(|i| {
                    CitingPatent::new(
                        PatentId::parse(&format!("{}", 9_000_000 + i)).unwrap(),
                        format!("title {i}"),
                        NaiveDate::from_ymd_opt(2016, 1, 5).unwrap(),
                        vec![
                            CitedReference {
                                cited_id: PatentId::parse("RE37123").unwrap(),
                                grant_year: Some(2001),
                            },
                            CitedReference {
                                cited_id: PatentId::parse("6506559").unwrap(),
                                grant_year: None,
                            },
                        ],
                    )
                })
                .collect(),
            total_reported: n,
            pages_fetched: 1,
            source: DataSource::Live,
        }
    }

    fn entry(n: u64) -> CacheEntry {
        CacheEntry::new(&parse_query("RNAi, \"RNA interference\"").unwrap(), "d", 1000, "2017-02-01", sample(n))
    }

    #[test]
    fn key_is_stable_and_input_sensitive() {
        let a = CacheKey::new("RNAi", "patentsview-legacy", 1000);
        assert_eq!(a, CacheKey::new("RNAi", "patentsview-legacy", 1000));
        assert_eq!(a.as_str().len(), 64);
        assert_ne!(a, CacheKey::new("RNAi", "patentsview-legacy", 500));
        assert_ne!(a, CacheKey::new("RNAi", "other", 1000));
        assert_ne!(a, CacheKey::new("siRNA", "patentsview-legacy", 1000));
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path()).unwrap();
        let e = entry(3);
        store.put(&e).unwrap();
        assert_eq!(store.get(&e.key).unwrap(), Some(e.clone()));
        assert_eq!(store.keys().unwrap(), vec![e.key.clone()]);
        assert_eq!(store.clear().unwrap(), 1);
        assert_eq!(store.get(&e.key).unwrap(), None);
    }

    #[test]
    fn miss_is_absent() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::new(dir.path());
        assert!(store.get(&CacheKey::new("x", "y", 1)).unwrap().is_none());
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path()).unwrap();
        let e = entry(5);
        store.put(&e).unwrap();
        let path = store.path_for(&e.key);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(store.get(&e.key), Err(CacheError::CorruptEntry { .. })));
    }

    #[test]
    fn tampered_payload_fails_checksum() {
        let text = encode(&entry(2));
        let tampered = text.replacen("title 0", "title X", 1);
        let err = decode(&tampered).unwrap_err();
        assert!(err.contains("checksum"), "{err}");
    }

    #[test]
    fn read_only_directory_is_permission_denied() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path()).unwrap();
        fs::set_permissions(dir.path(), fs::Permissions::from_mode(0o555)).unwrap();
        assert_eq!(store.writability(), Writability::ReadOnly);
        let err = store.put(&entry(1)).unwrap_err();
        fs::set_permissions(dir.path(), fs::Permissions::from_mode(0o755)).unwrap();
        assert!(matches!(err, CacheError::PermissionDenied(_)));
    }

    #[test]
    fn invalid_entry_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path()).unwrap();
        let mut e = entry(2);
        e.payload.patents.push(e.payload.patents[0].clone());
        assert!(matches!(store.put(&e), Err(CacheError::InvalidEntry(_))));
    }

    #[test]
    fn concurrent_writers_never_expose_partial_files() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(CacheStore::open(dir.path()).unwrap());
        let entries: Vec<CacheEntry> = (1..=6).map(|n| entry(n * 40)).collect();
        let key = entries[0].key.clone();
        std::thread::scope(|s| {
            for e in &entries {
                let store = store.clone();
                s.spawn(move || {
                    for _ in 0..10 {
                        store.put(e).unwrap();
                    }
                });
            }
            let store = store.clone();
            let key = key.clone();
            s.spawn(move || {
                for _ in 0..200 {
                    // Either absent (before the first rename) or a whole entry.
                    let got = store.get(&key).expect("reader saw a partial file");
                    if let Some(got) = got {
                        assert!(got.payload.patents.len() % 40 == 0);
                    }
                }
            });
        });
        let last = store.get(&key).unwrap().unwrap();
        assert!(entries.contains(&last));
        let stray: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(Result::ok)
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(stray.is_empty());
    }

    #[test]
    fn fixture_names_are_sanitized() {
        let set = FixtureSet::bundled();
        assert!(matches!(set.load("../Cargo"), Err(FixtureError::Unknown(_))));
        assert!(matches!(set.load("no-such-fixture"), Err(FixtureError::Unknown(_))));
    }
}
