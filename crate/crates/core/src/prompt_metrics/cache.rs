//! Append-only JSON-lines store of LLM responses.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Lowercase hex SHA-256 of `model \x1f template_id \x1f text`.
pub fn cache_key(model: &str, template_id: &str, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(model.as_bytes());
    h.update([0x1f]);
    h.update(template_id.as_bytes());
    h.update([0x1f]);
    h.update(text.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub model: String,
    pub template_id: String,
    pub prompt_text: String,
    pub response_text: String,
    /// Parsed answer as a short label, e.g. `yes`, `no`, `na`, `middle`, `invalid`.
    pub parsed: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

struct Inner {
    entries: HashMap<String, CacheEntry>,
    writer: Option<BufWriter<File>>,
}

/// Thread-safe response cache. All writes go through one lock, so lines are
/// never interleaved. A later line with the same key shadows an earlier one.
pub struct ResponseCache {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            inner: Mutex::new(Inner {
                entries: HashMap::new(),
                writer: None,
            }),
        }
    }

    /// Loads an existing cache file (or starts a new one) and appends to it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(&line).map_err(|e| Error::Cache {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
                entries.insert(entry.key.clone(), entry);
            }
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(Inner {
                entries,
                writer: Some(BufWriter::new(file)),
            }),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        self.lock().entries.get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.lock().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Persists one entry; the line is flushed before returning.
    pub fn insert(&self, entry: CacheEntry) -> Result<()> {
        let mut inner = self.lock();
        if let Some(w) = inner.writer.as_mut() {
            let path = self.path.as_deref().unwrap_or(Path::new("<cache>"));
            let line = serde_json::to_string(&entry)?;
            writeln!(w, "{line}")
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        inner.entries.insert(entry.key.clone(), entry);
        Ok(())
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(key: &str, response: &str) -> CacheEntry {
        CacheEntry {
            key: key.into(),
            model: "m".into(),
            template_id: "pm_01".into(),
            prompt_text: "p".into(),
            response_text: response.into(),
            parsed: "yes".into(),
            timestamp: 0,
        }
    }

    #[test]
    fn key_is_hex_sha256_of_joined_fields() {
        let k = cache_key("m", "pm_01", "text");
        assert_eq!(k.len(), 64);
        assert!(k.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
        assert_ne!(k, cache_key("m", "pm_01", "text "));
        assert_ne!(cache_key("a", "bc", "d"), cache_key("ab", "c", "d"));
        // sha256 of "m\x1fpm_01\x1ftext"
        let mut h = Sha256::new();
        h.update(b"m\x1fpm_01\x1ftext");
        assert_eq!(k, hex::encode(h.finalize()));
    }

    #[test]
    fn persists_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.jsonl");
        {
            let c = ResponseCache::open(&path).unwrap();
            c.insert(entry("a", "Yes.")).unwrap();
            c.insert(entry("b", "No.")).unwrap();
        }
        let c = ResponseCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get("a").unwrap().response_text, "Yes.");
        c.insert(entry("c", "x")).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
    }

    #[test]
    fn corrupt_line_is_reported_by_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let good = serde_json::to_string(&entry("a", "Yes")).unwrap();
        std::fs::write(&path, format!("{good}\n{{broken\n")).unwrap();
        match ResponseCache::open(&path) {
            Err(Error::Cache { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected cache error, got {:?}", other.map(|c| c.len())),
        }
    }
}
