//! Persistent response cache.
//!
//! The on-disk form is an append-only log, one JSON record per line:
//! `{"key": <sha256 hex>, "request": {...}, "response": ...}`. Replaying the
//! log rebuilds the in-memory map; a partial trailing record is truncated
//! (see [`crate::jsonl`]).

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::jsonl::read_records;

use super::{check_batch_len, BackendError, LanguageSpec, Translator, Transliterator};

/// SHA-256 over the parts, each terminated by a NUL byte.
pub fn cache_key(kind: &str, parts: &[&str]) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_bytes());
    h.update([0]);
    for p in parts {
        h.update(p.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: String,
    request: Value,
    response: Value,
}

struct Inner {
    map: HashMap<String, Value>,
    writer: Option<BufWriter<File>>,
}

pub struct CacheFile {
    path: Option<PathBuf>,
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for CacheFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CacheFile").field("path", &self.path).field("len", &self.len()).finish()
    }
}

fn cache_err(path: &Path, e: impl std::fmt::Display) -> BackendError {
    BackendError::Cache(format!("{}: {e}", path.display()))
}

impl CacheFile {
    pub fn in_memory() -> Self {
        CacheFile { path: None, inner: Mutex::new(Inner { map: HashMap::new(), writer: None }) }
    }

    pub fn open(path: &Path) -> Result<Self, BackendError> {
        let mut map = HashMap::new();
        let records: Vec<Record> = read_records(path).map_err(|e| BackendError::Cache(e.to_string()))?;
        for rec in records {
            map.entry(rec.key).or_insert(rec.response);
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| cache_err(path, e))?;
        Ok(CacheFile {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(Inner { map, writer: Some(BufWriter::new(file)) }),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        self.inner.lock().expect("cache lock").map.get(key).cloned()
    }

    /// Store a response unless one is already present, and return the value
    /// that is now canonical for `key`. First writer wins, so a
    /// nondeterministic service still yields one answer per key.
    pub fn insert(&self, key: &str, request: Value, response: Value) -> Result<Value, BackendError> {
        let mut inner = self.inner.lock().expect("cache lock");
        if let Some(existing) = inner.map.get(key) {
            return Ok(existing.clone());
        }
        if let Some(w) = inner.writer.as_mut() {
            let rec = Record { key: key.to_string(), request, response: response.clone() };
            let mut line = serde_json::to_vec(&rec).map_err(|e| BackendError::Cache(e.to_string()))?;
            line.push(b'\n');
            let path = self.path.as_deref().unwrap_or(Path::new("<cache>"));
            w.write_all(&line).and_then(|_| w.flush()).map_err(|e| cache_err(path, e))?;
        }
        inner.map.insert(key.to_string(), response.clone());
        Ok(response)
    }
}

/// Look up every item, send only the misses (deduplicated, in first-seen
/// order) to `fetch`, store the results and return values in input order.
fn cached_batch<F>(
    cache: &CacheFile,
    keys: &[String],
    requests: &[Value],
    texts: &[String],
    fetch: F,
) -> Result<Vec<String>, BackendError>
where
    F: FnOnce(&[String]) -> Result<Vec<String>, BackendError>,
{
    let mut out: Vec<Option<String>> =
        keys.iter().map(|k| cache.get(k).and_then(|v| v.as_str().map(str::to_string))).collect();
    let mut miss_idx: Vec<usize> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, slot) in out.iter().enumerate() {
        if slot.is_none() && seen.insert(keys[i].as_str()) {
            miss_idx.push(i);
        }
    }
    if !miss_idx.is_empty() {
        let miss_texts: Vec<String> = miss_idx.iter().map(|&i| texts[i].clone()).collect();
        let fetched = fetch(&miss_texts)?;
        check_batch_len(miss_texts.len(), fetched.len())?;
        let mut resolved = HashMap::new();
        for (&i, value) in miss_idx.iter().zip(fetched) {
            let canonical = cache.insert(&keys[i], requests[i].clone(), Value::String(value))?;
            resolved.insert(keys[i].clone(), canonical.as_str().unwrap_or_default().to_string());
        }
        for (i, slot) in out.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = resolved.get(&keys[i]).cloned();
            }
        }
    }
    Ok(out.into_iter().map(Option::unwrap_or_default).collect())
}

/// Wraps any translator with a [`CacheFile`] keyed by
/// `hash(text, source, target)`.
pub struct CachedTranslator<T> {
    inner: T,
    cache: Arc<CacheFile>,
}

impl<T: Translator> CachedTranslator<T> {
    pub fn new(inner: T, cache: Arc<CacheFile>) -> Self {
        CachedTranslator { inner, cache }
    }

    pub fn cache(&self) -> &CacheFile {
        &self.cache
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: Translator> Translator for CachedTranslator<T> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn translate_batch(
        &self,
        texts: &[String],
        src: &LanguageSpec,
        tgt: &LanguageSpec,
    ) -> Result<Vec<String>, BackendError> {
        let keys: Vec<String> = texts.iter().map(|t| cache_key("translate", &[&src.code, &tgt.code, t])).collect();
        let requests: Vec<Value> = texts
            .iter()
            .map(|t| json!({"op": "translate", "text": t, "source": src.code, "target": tgt.code}))
            .collect();
        cached_batch(&self.cache, &keys, &requests, texts, |miss| self.inner.translate_batch(miss, src, tgt))
    }
}

pub struct CachedTransliterator<T> {
    inner: T,
    cache: Arc<CacheFile>,
}

impl<T: Transliterator> CachedTransliterator<T> {
    pub fn new(inner: T, cache: Arc<CacheFile>) -> Self {
        CachedTransliterator { inner, cache }
    }
}

impl<T: Transliterator> Transliterator for CachedTransliterator<T> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn transliterate_batch(&self, texts: &[String], tgt: &LanguageSpec) -> Result<Vec<String>, BackendError> {
        let keys: Vec<String> = texts.iter().map(|t| cache_key("transliterate", &[&tgt.code, t])).collect();
        let requests: Vec<Value> =
            texts.iter().map(|t| json!({"op": "transliterate", "text": t, "target": tgt.code})).collect();
        cached_batch(&self.cache, &keys, &requests, texts, |miss| self.inner.transliterate_batch(miss, tgt))
    }
}
