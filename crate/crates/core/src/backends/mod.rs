//! Service-agnostic interfaces for translation, transliteration and
//! similarity scoring, with offline built-ins and cached remote clients.
//!
//! Every backend is `Send + Sync`; the pipeline calls them from a worker
//! pool. Remote calls are idempotent reads, so retries never duplicate side
//! effects.

mod cache;
mod digits;
mod language;
mod remote;
mod similarity;
mod translate;

use std::time::Duration;

use thiserror::Error;

use crate::real::Real;

pub use cache::{cache_key, CacheFile, CachedTranslator, CachedTransliterator};
pub use digits::{convert_digits, transliterate};
pub use language::{Family, LanguageRegistry, LanguageSpec};
pub use remote::{BackendConfig, RemoteEmbeddingSimilarity, RemoteTranslator, RemoteTransliterator};
pub use similarity::{CharNgramCosine, ExactMatchSimilarity, SimilarityScore};
pub use translate::{IdentityTranslator, IdentityTransliterator, MockTranslator, MOCK_MARKER};

#[derive(Debug, Clone, Error)]
pub enum BackendError {
    #[error("backend unavailable after {attempts} attempt(s): {message}")]
    Unavailable { attempts: u32, message: String },
    #[error("rate limited{}", retry_after.map(|d| format!(" (retry after {:.1}s)", d.as_secs_f64())).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("backend returned an empty translation")]
    EmptyTranslation,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("unknown language code `{0}`")]
    UnknownLanguage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub trait Translator: Send + Sync {
    fn name(&self) -> &str;

    /// Translate each text; the output is positionally aligned with the
    /// input. Empty outputs are returned as-is so the caller can decide how
    /// to drop them.
    fn translate_batch(
        &self,
        texts: &[String],
        src: &LanguageSpec,
        tgt: &LanguageSpec,
    ) -> Result<Vec<String>, BackendError>;

    fn translate(&self, text: &str, src: &LanguageSpec, tgt: &LanguageSpec) -> Result<String, BackendError> {
        let out = self
            .translate_batch(&[text.to_string()], src, tgt)?
            .pop()
            .ok_or_else(|| BackendError::Protocol("empty batch response".into()))?;
        if out.trim().is_empty() {
            return Err(BackendError::EmptyTranslation);
        }
        Ok(out)
    }
}

pub trait Transliterator: Send + Sync {
    fn name(&self) -> &str;

    fn transliterate_batch(&self, texts: &[String], tgt: &LanguageSpec) -> Result<Vec<String>, BackendError>;
}

pub trait Similarity<F: Real>: Send + Sync {
    fn name(&self) -> &str;

    fn similarity(&self, a: &str, b: &str) -> Result<SimilarityScore<F>, BackendError>;

    /// `score_matrix(c, t)[i] == similarity(c[i], t)`.
    fn score_matrix(&self, candidates: &[&str], target: &str) -> Result<Vec<SimilarityScore<F>>, BackendError> {
        candidates.iter().map(|c| self.similarity(c, target)).collect()
    }
}

pub(crate) fn check_batch_len(expected: usize, got: usize) -> Result<(), BackendError> {
    if expected == got {
        Ok(())
    } else {
        Err(BackendError::Protocol(format!("expected {expected} results, got {got}")))
    }
}
