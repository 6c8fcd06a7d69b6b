//! HTTP clients for remote translation, transliteration and embedding
//! services.
//!
//! Wire contract (JSON over POST, one request per batch):
//!
//! | service        | request                              | response                          |
//! |----------------|--------------------------------------|-----------------------------------|
//! | translate      | `{texts, source, target}`            | `{translations}`                  |
//! | transliterate  | `{texts, target}`                    | `{transliterations}`              |
//! | embed          | `{texts}`                            | `{embeddings}` (list of vectors)  |
//!
//! Responses are positionally aligned with `texts`. Requests that fail with
//! a connection error, a timeout, 408, 429 or 5xx are retried with
//! exponential backoff; a 429 `Retry-After` header overrides the backoff.

use std::marker::PhantomData;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    cache_key, check_batch_len, BackendError, CacheFile, LanguageSpec, Similarity, SimilarityScore, Translator,
    Transliterator,
};
use crate::real::Real;

const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub endpoint: String,
    pub cache_path: Option<PathBuf>,
    pub max_retries: u32,
    /// First retry delay; doubles on each further attempt.
    pub backoff_base_ms: u64,
    /// Requests per second; 0 disables limiting.
    pub rate_limit: f64,
    pub batch_size: usize,
    pub timeout_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: String::new(),
            cache_path: None,
            max_retries: 3,
            backoff_base_ms: 500,
            rate_limit: 0.0,
            batch_size: 32,
            timeout_ms: 30_000,
        }
    }
}

impl BackendConfig {
    pub fn check(&self) -> Result<(), BackendError> {
        if self.batch_size == 0 {
            return Err(BackendError::Config("batch_size must be at least 1".into()));
        }
        if self.rate_limit.is_nan() || self.rate_limit < 0.0 {
            return Err(BackendError::Config("rate_limit must be non-negative".into()));
        }
        Ok(())
    }

    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64.checked_shl(attempt).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor)).min(MAX_BACKOFF)
    }
}

struct HttpClient {
    client: reqwest::blocking::Client,
    cfg: BackendConfig,
    next_slot: Mutex<Option<Instant>>,
}

enum Failure {
    Retry { message: String, retry_after: Option<Duration>, rate_limited: bool },
    Fatal(BackendError),
}

impl HttpClient {
    fn new(cfg: BackendConfig, endpoint_path: &str) -> Result<Self, BackendError> {
        cfg.check()?;
        if cfg.endpoint.is_empty() {
            return Err(BackendError::Config(format!("remote {endpoint_path} backend needs an endpoint")));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(HttpClient { client, cfg, next_slot: Mutex::new(None) })
    }

    fn throttle(&self) {
        if self.cfg.rate_limit <= 0.0 {
            return;
        }
        let interval = Duration::from_secs_f64(1.0 / self.cfg.rate_limit);
        let wait = {
            let mut slot = self.next_slot.lock().expect("rate limiter lock");
            let now = Instant::now();
            let start = slot.map_or(now, |s| s.max(now));
            *slot = Some(start + interval);
            start - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }

    fn attempt<Resp: DeserializeOwned>(&self, body: &Value) -> Result<Resp, Failure> {
        self.throttle();
        let resp = match self.client.post(&self.cfg.endpoint).json(body).send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() || e.is_connect() || e.is_request() => {
                return Err(Failure::Retry { message: e.to_string(), retry_after: None, rate_limited: false })
            }
            Err(e) => return Err(Failure::Fatal(BackendError::Protocol(e.to_string()))),
        };
        let status = resp.status();
        if status.is_success() {
            return resp
                .json::<Resp>()
                .map_err(|e| Failure::Fatal(BackendError::Protocol(format!("bad response body: {e}"))));
        }
        let retry_after = resp
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<f64>().ok())
            .map(Duration::from_secs_f64);
        let code = status.as_u16();
        if matches!(code, 408 | 429) || status.is_server_error() {
            Err(Failure::Retry { message: format!("HTTP {status}"), retry_after, rate_limited: code == 429 })
        } else {
            Err(Failure::Fatal(BackendError::Protocol(format!("HTTP {status}"))))
        }
    }

    fn post<Resp: DeserializeOwned>(&self, body: &Value) -> Result<Resp, BackendError> {
        let attempts = self.cfg.max_retries + 1;
        let mut last = None;
        for attempt in 0..attempts {
            match self.attempt(body) {
                Ok(r) => return Ok(r),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry { message, retry_after, rate_limited }) => {
                    let delay = retry_after.unwrap_or_else(|| self.cfg.backoff(attempt));
                    if attempt + 1 < attempts {
                        warn!("{}: {message}; retrying in {delay:?}", self.cfg.endpoint);
                        std::thread::sleep(delay);
                    }
                    last = Some((message, retry_after, rate_limited));
                }
            }
        }
        match last {
            Some((_, retry_after, true)) => Err(BackendError::RateLimited { retry_after }),
            Some((message, _, false)) => Err(BackendError::Unavailable { attempts, message }),
            None => Err(BackendError::Unavailable { attempts, message: "no attempts made".into() }),
        }
    }
}

#[derive(Deserialize)]
struct TranslateResponse {
    translations: Vec<String>,
}

#[derive(Deserialize)]
struct TransliterateResponse {
    transliterations: Vec<String>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

pub struct RemoteTranslator {
    http: HttpClient,
}

impl RemoteTranslator {
    pub fn new(cfg: BackendConfig) -> Result<Self, BackendError> {
        Ok(RemoteTranslator { http: HttpClient::new(cfg, "translation")? })
    }
}

impl Translator for RemoteTranslator {
    fn name(&self) -> &str {
        "remote"
    }

    fn translate_batch(
        &self,
        texts: &[String],
        src: &LanguageSpec,
        tgt: &LanguageSpec,
    ) -> Result<Vec<String>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.http.cfg.batch_size) {
            debug!("translate batch of {} ({} -> {})", chunk.len(), src.code, tgt.code);
            let body = json!({"texts": chunk, "source": src.code, "target": tgt.code});
            let resp: TranslateResponse = self.http.post(&body)?;
            check_batch_len(chunk.len(), resp.translations.len())?;
            out.extend(resp.translations);
        }
        Ok(out)
    }
}

pub struct RemoteTransliterator {
    http: HttpClient,
}

impl RemoteTransliterator {
    pub fn new(cfg: BackendConfig) -> Result<Self, BackendError> {
        Ok(RemoteTransliterator { http: HttpClient::new(cfg, "transliteration")? })
    }
}

impl Transliterator for RemoteTransliterator {
    fn name(&self) -> &str {
        "remote"
    }

    fn transliterate_batch(&self, texts: &[String], tgt: &LanguageSpec) -> Result<Vec<String>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.http.cfg.batch_size) {
            let body = json!({"texts": chunk, "target": tgt.code});
            let resp: TransliterateResponse = self.http.post(&body)?;
            check_batch_len(chunk.len(), resp.transliterations.len())?;
            out.extend(resp.transliterations);
        }
        Ok(out)
    }
}

/// Cosine similarity of embeddings from a remote encoder, clamped to
/// `[0, 1]`. Embeddings are cached per text.
pub struct RemoteEmbeddingSimilarity<F> {
    http: HttpClient,
    cache: Arc<CacheFile>,
    _scalar: PhantomData<fn() -> F>,
}

impl<F: Real> RemoteEmbeddingSimilarity<F> {
    pub fn new(cfg: BackendConfig, cache: Arc<CacheFile>) -> Result<Self, BackendError> {
        Ok(RemoteEmbeddingSimilarity { http: HttpClient::new(cfg, "embedding")?, cache, _scalar: PhantomData })
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, BackendError> {
        let keys: Vec<String> = texts.iter().map(|t| cache_key("embed", &[t])).collect();
        let mut out: Vec<Option<Vec<f64>>> =
            keys.iter().map(|k| self.cache.get(k).and_then(|v| serde_json::from_value(v).ok())).collect();
        let misses: Vec<usize> = (0..texts.len()).filter(|&i| out[i].is_none()).collect();
        for chunk in misses.chunks(self.http.cfg.batch_size) {
            let batch: Vec<&str> = chunk.iter().map(|&i| texts[i]).collect();
            let resp: EmbedResponse = self.http.post(&json!({"texts": batch}))?;
            check_batch_len(batch.len(), resp.embeddings.len())?;
            for (&i, emb) in chunk.iter().zip(resp.embeddings) {
                let canonical = self.cache.insert(&keys[i], json!({"op": "embed", "text": texts[i]}), json!(emb))?;
                out[i] = serde_json::from_value(canonical).ok();
            }
        }
        out.into_iter().map(|e| e.ok_or_else(|| BackendError::Protocol("missing embedding".into()))).collect()
    }

    fn cosine(a: &[f64], b: &[f64]) -> SimilarityScore<F> {
        if a.len() != b.len() {
            return SimilarityScore::zero();
        }
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return SimilarityScore::zero();
        }
        SimilarityScore::new(F::lit(dot / (na * nb)))
    }
}

impl<F: Real> Similarity<F> for RemoteEmbeddingSimilarity<F> {
    fn name(&self) -> &str {
        "remote-embedding"
    }

    fn similarity(&self, a: &str, b: &str) -> Result<SimilarityScore<F>, BackendError> {
        if a.trim().is_empty() || b.trim().is_empty() {
            return Ok(if a.trim().is_empty() && b.trim().is_empty() {
                SimilarityScore::one()
            } else {
                SimilarityScore::zero()
            });
        }
        let e = self.embed(&[a, b])?;
        Ok(Self::cosine(&e[0], &e[1]))
    }

    fn score_matrix(&self, candidates: &[&str], target: &str) -> Result<Vec<SimilarityScore<F>>, BackendError> {
        let mut all: Vec<&str> = candidates.to_vec();
        all.push(target);
        let embs = self.embed(&all)?;
        let (t, cands) = embs.split_last().expect("target embedded");
        Ok(cands.iter().map(|c| Self::cosine(c, t)).collect())
    }
}
