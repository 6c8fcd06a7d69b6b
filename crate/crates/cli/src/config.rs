//! Configuration file plus command-line overrides.
//!
//! Keys mirror the library types: `[pipeline]` holds `PipelineConfig`
//! fields, `[pipeline.align]` the alignment settings, and
//! `[backends.translate]`, `[backends.transliterate]` and `[backends.embed]`
//! hold `BackendConfig` fields for the remote services.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use qaxlate::align::{AlignConfig, ExtensionReference, ToleranceMode};
use qaxlate::backends::{
    BackendConfig, CacheFile, CachedTranslator, CachedTransliterator, CharNgramCosine, ExactMatchSimilarity,
    IdentityTranslator, IdentityTransliterator, LanguageRegistry, MockTranslator, RemoteEmbeddingSimilarity,
    RemoteTranslator, RemoteTransliterator, Similarity, Translator, Transliterator,
};
use qaxlate::metrics::{BleuMode, EvalOptions};
use qaxlate::pipeline::{default_abbreviations, BackendFailurePolicy, Backends, PipelineConfig};
use qaxlate::segment::Segmenter;
use qaxlate::Scalar;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TranslatorKind {
    Identity,
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TransliteratorKind {
    #[default]
    None,
    Identity,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKind {
    /// Character 3-gram cosine.
    #[default]
    Char3,
    Exact,
    /// Cosine of embeddings from a remote encoder.
    Remote,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub workers: usize,
    pub checkpoint_every: usize,
    pub drop_impossible: bool,
    pub translate_plausible: bool,
    pub convert_digits: bool,
    pub on_backend_failure: BackendFailurePolicy,
    /// Replaces the built-in abbreviation list.
    pub abbreviations_file: Option<PathBuf>,
    pub align: AlignConfig,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection {
            workers: 1,
            checkpoint_every: 1,
            drop_impossible: false,
            translate_plausible: false,
            convert_digits: true,
            on_backend_failure: BackendFailurePolicy::Abort,
            abbreviations_file: None,
            align: AlignConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendsSection {
    pub translator: TranslatorKind,
    pub transliterator: TransliteratorKind,
    pub similarity: SimilarityKind,
    /// Extra `[[language]]` rows added to the built-in registry.
    pub languages_file: Option<PathBuf>,
    pub translate: BackendConfig,
    pub transliterate: BackendConfig,
    pub embed: BackendConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub log_level: String,
    pub source: String,
    pub target: String,
    pub pipeline: PipelineSection,
    pub backends: BackendsSection,
    pub metrics: EvalOptions,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            log_level: "info".into(),
            source: "en".into(),
            target: "mr".into(),
            pipeline: PipelineSection::default(),
            backends: BackendsSection::default(),
            metrics: EvalOptions::default(),
        }
    }
}

/// Flags shared by `translate` and `inspect`. Each one overrides the
/// corresponding config key when given.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineFlags {
    /// Source language code.
    #[arg(long)]
    pub source: Option<String>,
    /// Target language code.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_enum)]
    pub backend: Option<TranslatorKind>,
    #[arg(long, value_enum)]
    pub transliterator: Option<TransliteratorKind>,
    #[arg(long, value_enum)]
    pub similarity: Option<SimilarityKind>,
    /// Endpoint of the remote translation service.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub transliterate_endpoint: Option<String>,
    #[arg(long)]
    pub embed_endpoint: Option<String>,
    /// Response cache for the remote translator, transliterator and encoder.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub languages_file: Option<PathBuf>,
    #[arg(long)]
    pub abbreviations_file: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Keep ASCII digits instead of converting them to the target script.
    #[arg(long)]
    pub no_digits: bool,
    #[arg(long)]
    pub drop_impossible: bool,
    #[arg(long)]
    pub translate_plausible: bool,
    #[arg(long, value_enum)]
    pub on_backend_failure: Option<FailurePolicyArg>,
    #[arg(long)]
    pub max_tokens: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub tolerance_mode: Option<ToleranceModeArg>,
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceArg>,
    #[arg(long)]
    pub min_score: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FailurePolicyArg {
    Abort,
    Drop,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ToleranceModeArg {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReferenceArg {
    RunningMax,
    Base,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BleuModeArg {
    Corpus,
    Sentence,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(CliConfig::default());
        };
        let raw = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&raw).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, f: &PipelineFlags) {
        let set = |slot: &mut String, v: &Option<String>| {
            if let Some(v) = v {
                *slot = v.clone();
            }
        };
        set(&mut self.source, &f.source);
        set(&mut self.target, &f.target);
        set(&mut self.backends.translate.endpoint, &f.endpoint);
        set(&mut self.backends.transliterate.endpoint, &f.transliterate_endpoint);
        set(&mut self.backends.embed.endpoint, &f.embed_endpoint);
        let b = &mut self.backends;
        b.translator = f.backend.unwrap_or(b.translator);
        b.transliterator = f.transliterator.unwrap_or(b.transliterator);
        b.similarity = f.similarity.unwrap_or(b.similarity);
        if let Some(c) = &f.cache {
            b.translate.cache_path = Some(c.clone());
            b.transliterate.cache_path = Some(c.clone());
            b.embed.cache_path = Some(c.clone());
        }
        if f.languages_file.is_some() {
            b.languages_file = f.languages_file.clone();
        }
        let p = &mut self.pipeline;
        if f.abbreviations_file.is_some() {
            p.abbreviations_file = f.abbreviations_file.clone();
        }
        p.workers = f.workers.unwrap_or(p.workers);
        p.checkpoint_every = f.checkpoint_every.unwrap_or(p.checkpoint_every);
        p.convert_digits &= !f.no_digits;
        p.drop_impossible |= f.drop_impossible;
        p.translate_plausible |= f.translate_plausible;
        if let Some(x) = f.on_backend_failure {
            p.on_backend_failure = match x {
                FailurePolicyArg::Abort => BackendFailurePolicy::Abort,
                FailurePolicyArg::Drop => BackendFailurePolicy::Drop,
            };
        }
        let a = &mut p.align;
        a.max_tokens = f.max_tokens.unwrap_or(a.max_tokens);
        a.tolerance = f.tolerance.unwrap_or(a.tolerance);
        a.min_score = f.min_score.unwrap_or(a.min_score);
        if let Some(m) = f.tolerance_mode {
            a.tolerance_mode = match m {
                ToleranceModeArg::Relative => ToleranceMode::Relative,
                ToleranceModeArg::Absolute => ToleranceMode::Absolute,
            };
        }
        if let Some(r) = f.reference {
            a.reference = match r {
                ReferenceArg::RunningMax => ExtensionReference::RunningMax,
                ReferenceArg::Base => ExtensionReference::Base,
            };
        }
    }

    pub fn apply_metrics(&mut self, remove_articles: bool, bleu_mode: Option<BleuModeArg>) {
        self.metrics.remove_articles |= remove_articles;
        if let Some(m) = bleu_mode {
            self.metrics.bleu_mode = match m {
                BleuModeArg::Corpus => BleuMode::Corpus,
                BleuModeArg::Sentence => BleuMode::SentenceAverage,
            };
        }
    }

    /// Print the resolved configuration to standard error as TOML.
    pub fn echo(&self) {
        match toml::to_string(self) {
            Ok(s) => {
                eprintln!("# resolved configuration");
                for line in s.lines() {
                    eprintln!("{line}");
                }
                eprintln!("# end configuration");
            }
            Err(e) => log::warn!("could not render configuration: {e}"),
        }
    }

    pub fn registry(&self) -> Result<LanguageRegistry, CliError> {
        let mut reg = LanguageRegistry::default();
        if let Some(path) = &self.backends.languages_file {
            reg.extend_from_file(path).map_err(|e| CliError::Input(e.to_string()))?;
        }
        Ok(reg)
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig, CliError> {
        let reg = self.registry()?;
        let lang = |code: &str| reg.require(code).cloned().map_err(|e| CliError::Input(e.to_string()));
        let p = &self.pipeline;
        let abbreviations = match &p.abbreviations_file {
            Some(path) => {
                let seg = Segmenter::from_abbreviation_file(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let mut v: Vec<String> = seg.abbreviations().map(str::to_string).collect();
                v.sort();
                v
            }
            None => default_abbreviations(),
        };
        let cfg = PipelineConfig {
            source_lang: lang(&self.source)?,
            target_lang: lang(&self.target)?,
            align: p.align,
            workers: p.workers,
            checkpoint_every: p.checkpoint_every,
            drop_impossible: p.drop_impossible,
            translate_plausible: p.translate_plausible,
            convert_digits: p.convert_digits,
            on_backend_failure: p.on_backend_failure,
            abbreviations,
        };
        cfg.check().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }

    pub fn backends(&self) -> Result<Backends<Scalar>, CliError> {
        let b = &self.backends;
        let config_err = |e: qaxlate::backends::BackendError| CliError::Input(e.to_string());
        // keys are namespaced by request kind, so services may share one file
        let mut opened: Vec<Arc<CacheFile>> = Vec::new();
        let mut open_cache = |cfg: &BackendConfig| -> Result<Arc<CacheFile>, CliError> {
            let Some(path) = &cfg.cache_path else {
                return Ok(Arc::new(CacheFile::in_memory()));
            };
            if let Some(c) = opened.iter().find(|c| c.path() == Some(path.as_path())) {
                return Ok(c.clone());
            }
            let c = Arc::new(CacheFile::open(path).map_err(config_err)?);
            opened.push(c.clone());
            Ok(c)
        };
        let translator: Arc<dyn Translator> = match b.translator {
            TranslatorKind::Identity => Arc::new(IdentityTranslator),
            TranslatorKind::Mock => Arc::new(MockTranslator::default()),
            TranslatorKind::Remote => Arc::new(CachedTranslator::new(
                RemoteTranslator::new(b.translate.clone()).map_err(config_err)?,
                open_cache(&b.translate)?,
            )),
        };
        let transliterator: Option<Arc<dyn Transliterator>> = match b.transliterator {
            TransliteratorKind::None => None,
            TransliteratorKind::Identity => Some(Arc::new(IdentityTransliterator)),
            TransliteratorKind::Remote => Some(Arc::new(CachedTransliterator::new(
                RemoteTransliterator::new(b.transliterate.clone()).map_err(config_err)?,
                open_cache(&b.transliterate)?,
            ))),
        };
        let similarity: Arc<dyn Similarity<Scalar>> = match b.similarity {
            SimilarityKind::Char3 => Arc::new(CharNgramCosine),
            SimilarityKind::Exact => Arc::new(ExactMatchSimilarity),
            SimilarityKind::Remote => {
                Arc::new(RemoteEmbeddingSimilarity::new(b.embed.clone(), open_cache(&b.embed)?).map_err(config_err)?)
            }
        };
        Ok(Backends { translator, transliterator, similarity })
    }
}
