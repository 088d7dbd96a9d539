//! Content-addressed result cache.
//!
//! Keys hash the artifact version, the full preset presentation, the object,
//! the bidegree and the monomial-order version, so entries written by another
//! version never match. Writes go through a temporary file and a rename, so
//! readers never see partial entries; a lock file keeps a single writer.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wsteen_core::{Bidegree, FieldPreset};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever the canonical monomial order changes.
pub const MONOMIAL_ORDER_VERSION: u32 = 1;
pub const DEFAULT_DIR: &str = ".wsteen-cache";
pub const ENV_VAR: &str = "WSTEEN_CACHE";

const STALE_LOCK: Duration = Duration::from_secs(120);

#[derive(Serialize, Deserialize)]
pub struct CacheEntry<T> {
    pub key: String,
    pub artifact_version: String,
    pub object: String,
    pub value: T,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// `--cache PATH`, then `$WSTEEN_CACHE`, then `.wsteen-cache/`.
    pub fn resolve(flag: Option<&Path>) -> Self {
        if let Some(p) = flag {
            return Cache::new(p);
        }
        match std::env::var_os(ENV_VAR) {
            Some(v) if !v.is_empty() => Cache::new(v),
            _ => Cache::new(DEFAULT_DIR),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(preset: &FieldPreset, object: &str, b: Bidegree) -> String {
        let mut h = Sha256::new();
        h.update(b"wsteen-cache\0");
        h.update(ARTIFACT_VERSION.as_bytes());
        h.update(b"\0");
        h.update(serde_json::to_vec(preset).expect("presets serialize"));
        h.update(b"\0");
        h.update(object.as_bytes());
        h.update(format!("\0{},{}\0order{}", b.p, b.q, MONOMIAL_ORDER_VERSION).as_bytes());
        format!("{:x}", h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let text = fs::read(self.path(key)).ok()?;
        let entry: CacheEntry<T> = serde_json::from_slice(&text).ok()?;
        (entry.key == key && entry.artifact_version == ARTIFACT_VERSION).then_some(entry.value)
    }

    /// Stores `value`; returns `Ok(false)` if another writer holds the lock.
    pub fn put<T: Serialize>(&self, key: &str, object: &str, value: &T) -> std::io::Result<bool> {
        fs::create_dir_all(&self.dir)?;
        let lock = self.dir.join(".lock");
        if let Ok(meta) = fs::metadata(&lock) {
            let old = meta.modified().ok().and_then(|m| SystemTime::now().duration_since(m).ok());
            if old.is_some_and(|age| age > STALE_LOCK) {
                let _ = fs::remove_file(&lock);
            }
        }
        let guard = match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Ok(false),
            Err(e) => return Err(e),
        };
        let result = self.write_entry(key, object, value);
        drop(guard);
        let _ = fs::remove_file(&lock);
        result.map(|_| true)
    }

    fn write_entry<T: Serialize>(&self, key: &str, object: &str, value: &T) -> std::io::Result<()> {
        let path = self.path(key);
        fs::create_dir_all(path.parent().expect("entry paths have a parent"))?;
        let entry = CacheEntry { key: key.to_string(), artifact_version: ARTIFACT_VERSION.to_string(), object: object.to_string(), value };
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(&entry)?)?;
        f.sync_all()?;
        fs::rename(tmp, path)
    }
}
