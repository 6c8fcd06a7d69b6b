//! End-to-end dataset translation.
//!
//! Per paragraph the source context is segmented once and every sentence is
//! translated in one batch. Per question the answer sentence(s) are located
//! in the source, the answer is translated on its own and aligned inside the
//! translated sentence(s), and the offset is mapped into the translated
//! context, which is the translated sentences joined by single spaces.
//!
//! Articles are processed in source order with paragraph-level parallelism
//! inside each article. Completed articles are appended to a progress file
//! so an interrupted run resumes where it stopped and produces the same
//! bytes as an uninterrupted one.

mod progress;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::align::{align_answer, align_answer_traced, locate_in_context, AlignConfig, AlignError, AlignmentTrace};
use crate::backends::{convert_digits, BackendError, LanguageSpec, Similarity, Translator, Transliterator};
use crate::real::Real;
use crate::segment::{find_answer_sentence, range_text, Segmenter, SentenceSpan, DEFAULT_ABBREVIATIONS};
use crate::squad::{serialize_dataset, Answer, Article, Paragraph, Qa, SquadDataset};

pub use progress::{ArticleRecord, ProgressLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendFailurePolicy {
    /// Stop the run; completed articles stay checkpointed.
    #[default]
    Abort,
    /// Drop the affected questions and carry on.
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub source_lang: LanguageSpec,
    pub target_lang: LanguageSpec,
    #[serde(default)]
    pub align: AlignConfig,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Articles per progress-file flush.
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
    #[serde(default)]
    pub drop_impossible: bool,
    /// Align `plausible_answers` like answers. When off they are removed,
    /// since their source offsets mean nothing in the translated context.
    #[serde(default)]
    pub translate_plausible: bool,
    #[serde(default = "yes")]
    pub convert_digits: bool,
    #[serde(default)]
    pub on_backend_failure: BackendFailurePolicy,
    #[serde(default = "default_abbreviations")]
    pub abbreviations: Vec<String>,
}

fn default_workers() -> usize {
    1
}

fn default_checkpoint_every() -> usize {
    1
}

fn yes() -> bool {
    true
}

pub fn default_abbreviations() -> Vec<String> {
    let mut v: Vec<String> = DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

impl PipelineConfig {
    pub fn new(source_lang: LanguageSpec, target_lang: LanguageSpec) -> Self {
        PipelineConfig {
            source_lang,
            target_lang,
            align: AlignConfig::default(),
            workers: default_workers(),
            checkpoint_every: default_checkpoint_every(),
            drop_impossible: false,
            translate_plausible: false,
            convert_digits: true,
            on_backend_failure: BackendFailurePolicy::Abort,
            abbreviations: default_abbreviations(),
        }
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(PipelineError::Config("checkpoint_every must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.align.min_score) {
            return Err(PipelineError::Config("min_score must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.align.tolerance) {
            return Err(PipelineError::Config("tolerance must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn segmenter(&self) -> Segmenter {
        Segmenter::with_abbreviations(&self.abbreviations)
    }
}

pub struct Backends<F> {
    pub translator: Arc<dyn Translator>,
    pub transliterator: Option<Arc<dyn Transliterator>>,
    pub similarity: Arc<dyn Similarity<F>>,
}

impl<F> Clone for Backends<F> {
    fn clone(&self) -> Self {
        Backends {
            translator: self.translator.clone(),
            transliterator: self.transliterator.clone(),
            similarity: self.similarity.clone(),
        }
    }
}

impl<F: Real> Backends<F> {
    pub fn new(translator: Arc<dyn Translator>, similarity: Arc<dyn Similarity<F>>) -> Self {
        Backends { translator, transliterator: None, similarity }
    }

    pub fn with_transliterator(mut self, t: Arc<dyn Transliterator>) -> Self {
        self.transliterator = Some(t);
        self
    }

    fn describe(&self) -> String {
        format!(
            "translator={} transliterator={} similarity={}",
            self.translator.name(),
            self.transliterator.as_ref().map_or("none", |t| t.name()),
            self.similarity.name()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DropReason {
    NoAlignment,
    EmptyTranslation,
    BackendFailure,
    AnswerOutsideContext,
    /// Unanswerable question removed because `drop_impossible` is set.
    ImpossibleFiltered,
}

impl DropReason {
    pub const ALL: [DropReason; 5] = [
        DropReason::NoAlignment,
        DropReason::EmptyTranslation,
        DropReason::BackendFailure,
        DropReason::AnswerOutsideContext,
        DropReason::ImpossibleFiltered,
    ];
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("article {article}, paragraph {paragraph}: {source}")]
    Backend { article: usize, paragraph: usize, source: BackendError },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("progress file {path} belongs to a different run (input or configuration changed)")]
    ProgressMismatch { path: PathBuf },
    #[error("configuration: {0}")]
    Config(String),
}

/// A paragraph's translated sentences, shared by all of its questions.
#[derive(Debug, Clone, PartialEq)]
pub struct ParagraphState {
    pub source_sentences: Vec<SentenceSpan>,
    pub translated: Vec<String>,
    /// `translated` joined with single spaces.
    pub context: String,
}

/// Result of one question.
#[derive(Debug, Clone, PartialEq)]
pub enum QaOutcome {
    Emit(Qa),
    Drop(DropReason),
}

fn is_latin_word(core: &str) -> bool {
    core.chars().any(|c| c.is_ascii_alphabetic())
}

/// Transliterate tokens that are still in Latin script, then convert
/// digits. Applied identically to sentences, questions and answers so that
/// an answer and its occurrence in the context always agree.
fn localize<F: Real>(texts: &mut [String], cfg: &PipelineConfig, backends: &Backends<F>) -> Result<(), BackendError> {
    if let Some(tr) = &backends.transliterator {
        let mut words: Vec<String> = Vec::new();
        for t in texts.iter() {
            for tok in t.split_whitespace() {
                let core = tok.trim_matches(|c: char| !c.is_alphanumeric());
                if is_latin_word(core) && !words.iter().any(|w| w == core) {
                    words.push(core.to_string());
                }
            }
        }
        if !words.is_empty() {
            let rendered = tr.transliterate_batch(&words, &cfg.target_lang)?;
            crate::backends::check_batch_len(words.len(), rendered.len())?;
            let map: BTreeMap<&str, &str> =
                words.iter().map(String::as_str).zip(rendered.iter().map(String::as_str)).collect();
            for t in texts.iter_mut() {
                *t = replace_words(t, &map);
            }
        }
    }
    if cfg.convert_digits {
        for t in texts.iter_mut() {
            *t = convert_digits(t, &cfg.target_lang);
        }
    }
    Ok(())
}

/// Rebuild `text` replacing the alphanumeric core of each whitespace token
/// found in `map`, keeping whitespace and surrounding punctuation.
fn replace_words(text: &str, map: &BTreeMap<&str, &str>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        let ws_end = rest.find(|c: char| !c.is_whitespace()).unwrap_or(rest.len());
        out.push_str(&rest[..ws_end]);
        rest = &rest[ws_end..];
        let tok_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let tok = &rest[..tok_end];
        let core = tok.trim_matches(|c: char| !c.is_alphanumeric());
        match (core.is_empty(), map.get(core)) {
            (false, Some(rep)) => {
                let lead = tok.find(core).unwrap_or(0);
                out.push_str(&tok[..lead]);
                out.push_str(rep);
                out.push_str(&tok[lead + core.len()..]);
            }
            _ => out.push_str(tok),
        }
        rest = &rest[tok_end..];
    }
    out
}

/// Segment and translate a paragraph context.
pub fn translate_paragraph<F: Real>(
    p: &Paragraph,
    cfg: &PipelineConfig,
    backends: &Backends<F>,
) -> Result<ParagraphState, BackendError> {
    let source_sentences = cfg.segmenter().split_sentences(&p.context);
    let texts: Vec<String> = source_sentences.iter().map(|s| s.text.clone()).collect();
    let mut translated = if texts.is_empty() {
        Vec::new()
    } else {
        backends.translator.translate_batch(&texts, &cfg.source_lang, &cfg.target_lang)?
    };
    crate::backends::check_batch_len(texts.len(), translated.len())?;
    for t in translated.iter_mut() {
        *t = t.trim().to_string();
    }
    localize(&mut translated, cfg, backends)?;
    let context = translated.join(" ");
    Ok(ParagraphState { source_sentences, translated, context })
}

enum AnswerFailure {
    Drop(DropReason),
    Backend(BackendError),
}

impl From<BackendError> for AnswerFailure {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::EmptyTranslation => AnswerFailure::Drop(DropReason::EmptyTranslation),
            other => AnswerFailure::Backend(other),
        }
    }
}

fn align_one<F: Real>(
    source: &Answer,
    translated_answer: &str,
    state: &ParagraphState,
    cfg: &PipelineConfig,
    backends: &Backends<F>,
) -> Result<Answer, AnswerFailure> {
    let range = find_answer_sentence(&state.source_sentences, source.answer_start, source.char_len())
        .map_err(|_| AnswerFailure::Drop(DropReason::AnswerOutsideContext))?;
    let sentences = &state.translated[range.clone()];
    if sentences.iter().any(|s| s.is_empty()) || translated_answer.trim().is_empty() {
        return Err(AnswerFailure::Drop(DropReason::EmptyTranslation));
    }
    let target = sentences.join(" ");
    let aligned = match align_answer(&target, translated_answer, backends.similarity.as_ref(), &cfg.align) {
        Ok(a) => a,
        Err(AlignError::NoAlignment { .. }) => return Err(AnswerFailure::Drop(DropReason::NoAlignment)),
        Err(AlignError::EmptyInput) => return Err(AnswerFailure::Drop(DropReason::EmptyTranslation)),
        Err(AlignError::Backend(e)) => return Err(e.into()),
    };
    let (answer_start, _) = locate_in_context(&state.translated, *range.start(), aligned.char_start, aligned.char_end);
    Ok(Answer { text: aligned.span_text, answer_start })
}

/// Question, then answers, then plausible answers, translated in one batch
/// and localized.
fn translate_qa_texts<F: Real>(
    qa: &Qa,
    plausible: &[Answer],
    cfg: &PipelineConfig,
    backends: &Backends<F>,
) -> Result<Vec<String>, BackendError> {
    let mut texts = vec![qa.question.clone()];
    texts.extend(qa.answers.iter().map(|a| a.text.clone()));
    texts.extend(plausible.iter().map(|a| a.text.clone()));
    let mut translated = backends.translator.translate_batch(&texts, &cfg.source_lang, &cfg.target_lang)?;
    crate::backends::check_batch_len(texts.len(), translated.len())?;
    for t in translated.iter_mut() {
        *t = t.trim().to_string();
    }
    localize(&mut translated, cfg, backends)?;
    Ok(translated)
}

/// What the pipeline did for one gold answer, for debugging.
#[derive(Debug, Clone)]
pub struct AnswerInspection<F> {
    pub source: Answer,
    /// Source sentence range holding the answer, if it was found.
    pub sentences: Option<RangeInclusive<usize>>,
    pub source_text: String,
    pub translated_text: String,
    pub translated_answer: String,
    pub trace: Option<AlignmentTrace<F>>,
    /// The emitted answer, when alignment succeeded.
    pub emitted: Option<Answer>,
}

#[derive(Debug, Clone)]
pub struct QaInspection<F> {
    pub paragraph: ParagraphState,
    pub question: String,
    pub answers: Vec<AnswerInspection<F>>,
}

/// Re-run one question exactly as the pipeline would, keeping the
/// alignment trace of every answer.
pub fn inspect_qa<F: Real>(
    qa: &Qa,
    paragraph: &Paragraph,
    cfg: &PipelineConfig,
    backends: &Backends<F>,
) -> Result<QaInspection<F>, BackendError> {
    let state = translate_paragraph(paragraph, cfg, backends)?;
    let translated = translate_qa_texts(qa, &[], cfg, backends)?;
    let mut answers = Vec::new();
    for (src, tgt) in qa.answers.iter().zip(&translated[1..]) {
        let range = find_answer_sentence(&state.source_sentences, src.answer_start, src.char_len()).ok();
        let (source_text, translated_text, trace) = match &range {
            Some(r) => {
                let source_text = range_text(&paragraph.context, &state.source_sentences, r).to_string();
                let target = state.translated[r.clone()].join(" ");
                let (_, trace) = align_answer_traced(&target, tgt, backends.similarity.as_ref(), &cfg.align);
                (source_text, target, Some(trace))
            }
            None => (String::new(), String::new(), None),
        };
        let emitted = align_one(src, tgt, &state, cfg, backends).ok();
        answers.push(AnswerInspection {
            source: src.clone(),
            sentences: range,
            source_text,
            translated_text,
            translated_answer: tgt.clone(),
            trace,
            emitted,
        });
    }
    Ok(QaInspection { paragraph: state, question: translated[0].clone(), answers })
}

/// Translate one question against its paragraph's translated state.
/// `Err` is returned only for backend failures under the abort policy.
pub fn translate_qa<F: Real>(
    qa: &Qa,
    state: &ParagraphState,
    cfg: &PipelineConfig,
    backends: &Backends<F>,
) -> Result<QaOutcome, BackendError> {
    if qa.is_impossible && cfg.drop_impossible {
        return Ok(QaOutcome::Drop(DropReason::ImpossibleFiltered));
    }
    let plausible: &[Answer] = match (&qa.plausible_answers, cfg.translate_plausible) {
        (Some(p), true) => p,
        _ => &[],
    };
    let translated = match translate_qa_texts(qa, plausible, cfg, backends) {
        Ok(t) => t,
        Err(e) => {
            return match (e, cfg.on_backend_failure) {
                (BackendError::EmptyTranslation, _) => Ok(QaOutcome::Drop(DropReason::EmptyTranslation)),
                (_, BackendFailurePolicy::Drop) => Ok(QaOutcome::Drop(DropReason::BackendFailure)),
                (e, BackendFailurePolicy::Abort) => Err(e),
            }
        }
    };
    let question = translated[0].clone();
    if question.is_empty() {
        return Ok(QaOutcome::Drop(DropReason::EmptyTranslation));
    }
    let (answer_texts, plausible_texts) = translated[1..].split_at(qa.answers.len());

    let align_all =
        |sources: &[Answer], targets: &[String]| -> Result<(Vec<Answer>, Option<DropReason>), BackendError> {
            let mut ok = Vec::new();
            let mut first_failure = None;
            for (src, tgt) in sources.iter().zip(targets) {
                match align_one(src, tgt, state, cfg, backends) {
                    Ok(a) => ok.push(a),
                    Err(AnswerFailure::Drop(r)) => {
                        first_failure.get_or_insert(r);
                    }
                    Err(AnswerFailure::Backend(e)) => match cfg.on_backend_failure {
                        BackendFailurePolicy::Abort => return Err(e),
                        BackendFailurePolicy::Drop => {
                            first_failure.get_or_insert(DropReason::BackendFailure);
                        }
                    },
                }
            }
            Ok((ok, first_failure))
        };

    let plausible_answers = if cfg.translate_plausible && qa.plausible_answers.is_some() {
        Some(align_all(plausible, plausible_texts)?.0)
    } else {
        None
    };

    if qa.is_impossible {
        return Ok(QaOutcome::Emit(Qa {
            question,
            id: qa.id.clone(),
            answers: Vec::new(),
            plausible_answers,
            is_impossible: true,
        }));
    }
    let (answers, failure) = align_all(&qa.answers, answer_texts)?;
    if answers.is_empty() {
        return Ok(QaOutcome::Drop(failure.unwrap_or(DropReason::NoAlignment)));
    }
    Ok(QaOutcome::Emit(Qa { question, id: qa.id.clone(), answers, plausible_answers, is_impossible: false }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedQa {
    pub id: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub input_qas: usize,
    pub emitted_qas: usize,
    pub dropped: BTreeMap<DropReason, usize>,
    pub drops: Vec<DroppedQa>,
    /// Wall time per article in milliseconds, in article order.
    pub article_timings_ms: Vec<u64>,
    /// Articles taken from the progress file instead of being recomputed.
    pub resumed_articles: usize,
}

impl PipelineReport {
    fn empty() -> Self {
        PipelineReport {
            input_qas: 0,
            emitted_qas: 0,
            dropped: DropReason::ALL.iter().map(|r| (*r, 0)).collect(),
            drops: Vec::new(),
            article_timings_ms: Vec::new(),
            resumed_articles: 0,
        }
    }

    pub fn total_dropped(&self) -> usize {
        self.dropped.values().sum()
    }

    fn absorb(&mut self, rec: &ArticleRecord) {
        self.input_qas += rec.input_qas;
        self.emitted_qas += rec.emitted_qas;
        for d in &rec.drops {
            *self.dropped.entry(d.reason).or_default() += 1;
            self.drops.push(d.clone());
        }
        self.article_timings_ms.push(rec.elapsed_ms);
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "input QAs: {}\nemitted QAs: {}\ndropped: {}\n",
            self.input_qas,
            self.emitted_qas,
            self.total_dropped()
        );
        for (reason, n) in &self.dropped {
            s.push_str(&format!("  {reason:?}: {n}\n"));
        }
        s.push_str(&format!(
            "articles: {} ({} resumed), total time {} ms\n",
            self.article_timings_ms.len(),
            self.resumed_articles,
            self.article_timings_ms.iter().sum::<u64>()
        ));
        s
    }
}

type ParagraphOutcome = Result<(Option<Paragraph>, Vec<DroppedQa>), PipelineError>;

fn translate_article<F: Real>(
    idx: usize,
    article: &Article,
    cfg: &PipelineConfig,
    backends: &Backends<F>,
) -> Result<ArticleRecord, PipelineError> {
    let started = Instant::now();
    let per_paragraph: Vec<ParagraphOutcome> = article
        .paragraphs
        .par_iter()
        .enumerate()
        .map(|(pi, p)| {
            let backend_err = |source| PipelineError::Backend { article: idx, paragraph: pi, source };
            let state = match translate_paragraph(p, cfg, backends) {
                Ok(s) => s,
                Err(e)
                    if cfg.on_backend_failure == BackendFailurePolicy::Drop
                        || matches!(e, BackendError::EmptyTranslation) =>
                {
                    debug!("article {idx} paragraph {pi}: {e}; dropping its questions");
                    let reason = if matches!(e, BackendError::EmptyTranslation) {
                        DropReason::EmptyTranslation
                    } else {
                        DropReason::BackendFailure
                    };
                    let drops = p.qas.iter().map(|q| DroppedQa { id: q.id.clone(), reason }).collect();
                    return Ok((None, drops));
                }
                Err(e) => return Err(backend_err(e)),
            };
            let mut qas = Vec::new();
            let mut drops = Vec::new();
            for qa in &p.qas {
                match translate_qa(qa, &state, cfg, backends).map_err(backend_err)? {
                    QaOutcome::Emit(q) => qas.push(q),
                    QaOutcome::Drop(reason) => drops.push(DroppedQa { id: qa.id.clone(), reason }),
                }
            }
            let para = (!qas.is_empty()).then_some(Paragraph { context: state.context, qas });
            Ok((para, drops))
        })
        .collect();
    let mut paragraphs = Vec::new();
    let mut drops = Vec::new();
    for r in per_paragraph {
        let (p, d) = r?;
        paragraphs.extend(p);
        drops.extend(d);
    }
    let out = Article { title: article.title.clone(), paragraphs };
    Ok(ArticleRecord {
        article_index: idx,
        input_qas: article.num_qas(),
        emitted_qas: out.num_qas(),
        drops,
        elapsed_ms: started.elapsed().as_millis() as u64,
        article: out,
    })
}

type CommitHook<'a> = Box<dyn Fn(usize, &Path) + Sync + 'a>;

/// Configured dataset translation run.
pub struct Pipeline<'a, F> {
    cfg: &'a PipelineConfig,
    backends: &'a Backends<F>,
    progress_path: Option<PathBuf>,
    on_commit: Option<CommitHook<'a>>,
}

impl<'a, F: Real> Pipeline<'a, F> {
    pub fn new(cfg: &'a PipelineConfig, backends: &'a Backends<F>) -> Self {
        Pipeline { cfg, backends, progress_path: None, on_commit: None }
    }

    /// Persist completed articles to `path` and resume from it.
    pub fn with_progress_file(mut self, path: impl Into<PathBuf>) -> Self {
        self.progress_path = Some(path.into());
        self
    }

    /// Called after each progress flush with the number of articles now
    /// committed and the progress file path.
    pub fn on_commit(mut self, hook: impl Fn(usize, &Path) + Sync + 'a) -> Self {
        self.on_commit = Some(Box::new(hook));
        self
    }

    /// Identifies the input and everything that affects output bytes.
    pub fn fingerprint(&self, ds: &SquadDataset) -> String {
        let mut h = Sha256::new();
        h.update(serialize_dataset(ds));
        h.update([0]);
        h.update(serde_json::to_vec(self.cfg).expect("config serializes"));
        h.update([0]);
        h.update(self.backends.describe().as_bytes());
        hex::encode(h.finalize())
    }

    pub fn run(&self, ds: &SquadDataset) -> Result<(SquadDataset, PipelineReport), PipelineError> {
        self.cfg.check()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let fingerprint = self.fingerprint(ds);
        let mut log = match &self.progress_path {
            Some(p) => Some(ProgressLog::open(p, &fingerprint)?),
            None => None,
        };
        let mut report = PipelineReport::empty();
        let mut articles = Vec::with_capacity(ds.articles.len());
        if let Some(log) = &log {
            for rec in log.completed() {
                report.absorb(rec);
                articles.push(rec.article.clone());
            }
            report.resumed_articles = articles.len();
            if !articles.is_empty() {
                info!("resuming after {} completed article(s)", articles.len());
            }
        }
        if articles.len() > ds.articles.len() {
            return Err(PipelineError::Checkpoint("progress file has more articles than the input".into()));
        }
        let mut pending = Vec::new();
        for idx in articles.len()..ds.articles.len() {
            let rec = pool.install(|| translate_article(idx, &ds.articles[idx], self.cfg, self.backends))?;
            debug!("article {idx}: {} of {} QAs emitted", rec.emitted_qas, rec.input_qas);
            report.absorb(&rec);
            articles.push(rec.article.clone());
            pending.push(rec);
            let last = idx + 1 == ds.articles.len();
            if pending.len() >= self.cfg.checkpoint_every || last {
                if let Some(log) = log.as_mut() {
                    log.append(&pending)?;
                    if let Some(hook) = &self.on_commit {
                        hook(articles.len(), log.path());
                    }
                }
                pending.clear();
            }
        }
        let out = SquadDataset { version: ds.version.clone(), articles };
        debug_assert_eq!(report.emitted_qas + report.total_dropped(), report.input_qas);
        Ok((out, report))
    }
}

/// Translate a whole dataset without checkpointing.
pub fn translate_dataset<F: Real>(
    ds: &SquadDataset,
    cfg: &PipelineConfig,
    backends: &Backends<F>,
) -> Result<(SquadDataset, PipelineReport), PipelineError> {
    Pipeline::new(cfg, backends).run(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_replacement_keeps_punctuation_and_spacing() {
        let map: BTreeMap<&str, &str> = [("Paris", "पॅरिस"), ("NASA", "नासा")].into_iter().collect();
        assert_eq!(replace_words("in Paris,  (NASA) ok", &map), "in पॅरिस,  (नासा) ok");
        assert_eq!(replace_words("", &map), "");
        assert_eq!(replace_words(" ... ", &map), " ... ");
    }

    #[test]
    fn config_checks() {
        let reg = crate::backends::LanguageRegistry::default();
        let mut cfg = PipelineConfig::new(reg.get("en").unwrap().clone(), reg.get("mr").unwrap().clone());
        assert!(cfg.check().is_ok());
        cfg.workers = 0;
        assert!(cfg.check().is_err());
        cfg.workers = 2;
        cfg.align.min_score = 1.5;
        assert!(cfg.check().is_err());
    }
}
