//! Answer-span recovery inside a translated sentence.
//!
//! The translated answer rarely occurs verbatim in the translated sentence
//! (inflection, reordering, different word choice). Alignment therefore:
//!
//! 1. returns the first verbatim occurrence if there is one;
//! 2. otherwise scores every contiguous run of up to `max_tokens`
//!    whitespace tokens against the translated answer and keeps the best
//!    (ties go to the shorter, then the leftmost, run);
//! 3. grows that base span one neighbouring token at a time while the
//!    grown span's score stays within `tolerance` of the best score so far.
//!
//! All offsets are code points into the sentence.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, Similarity, SimilarityScore};
use crate::real::Real;
use crate::text::{char_len, char_slice, find_chars};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenizedSentence {
    pub text: String,
    pub tokens: Vec<Token>,
}

/// Whitespace tokenization. Punctuation stays attached to its word.
pub fn tokenize(sentence: &str) -> TokenizedSentence {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let mut pos = 0;
    for c in sentence.chars() {
        if c.is_whitespace() {
            if let Some((start, text)) = current.take() {
                tokens.push(Token { text, start, end: pos });
            }
        } else {
            current.get_or_insert_with(|| (pos, String::new())).1.push(c);
        }
        pos += 1;
    }
    if let Some((start, text)) = current {
        tokens.push(Token { text, start, end: pos });
    }
    TokenizedSentence { text: sentence.to_string(), tokens }
}

impl TokenizedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The contiguous token run `first..=last` as a candidate span.
    pub fn span(&self, first: usize, last: usize) -> CandidateSpan {
        let (start, end) = (self.tokens[first].start, self.tokens[last].end);
        let text = char_slice(&self.text, start, end).expect("token offsets inside sentence").to_string();
        CandidateSpan { first_token: first, last_token: last, text }
    }
}

/// An unscored run of tokens `first_token..=last_token`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSpan {
    pub first_token: usize,
    pub last_token: usize,
    pub text: String,
}

impl CandidateSpan {
    pub fn token_len(&self) -> usize {
        self.last_token - self.first_token + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentCandidate<F> {
    #[serde(flatten)]
    pub span: CandidateSpan,
    pub score: SimilarityScore<F>,
}

impl<F: Real> AlignmentCandidate<F> {
    /// Ordering used by `best_candidate`: higher score, then fewer tokens,
    /// then further left.
    pub fn beats(&self, other: &Self) -> bool {
        let (a, b) = (self.score.value(), other.score.value());
        if a != b {
            return a > b;
        }
        let (la, lb) = (self.span.token_len(), other.span.token_len());
        if la != lb {
            return la < lb;
        }
        self.span.first_token < other.span.first_token
    }
}

/// All token runs of length `1..=max_tokens`, ordered by first token and
/// then by length.
pub fn enumerate_candidates(s: &TokenizedSentence, max_tokens: usize) -> Vec<CandidateSpan> {
    let n = s.len();
    let max_tokens = max_tokens.max(1);
    let mut out = Vec::new();
    for first in 0..n {
        for len in 1..=max_tokens.min(n - first) {
            out.push(s.span(first, first + len - 1));
        }
    }
    out
}

pub fn score_candidates<F: Real>(
    candidates: &[CandidateSpan],
    translated_answer: &str,
    sim: &dyn Similarity<F>,
) -> Result<Vec<AlignmentCandidate<F>>, BackendError> {
    let texts: Vec<&str> = candidates.iter().map(|c| c.text.as_str()).collect();
    let scores = sim.score_matrix(&texts, translated_answer)?;
    if scores.len() != candidates.len() {
        return Err(BackendError::Protocol("score matrix length mismatch".into()));
    }
    Ok(candidates.iter().zip(scores).map(|(span, score)| AlignmentCandidate { span: span.clone(), score }).collect())
}

fn pick_best<F: Real>(scored: &[AlignmentCandidate<F>]) -> Option<&AlignmentCandidate<F>> {
    scored.iter().fold(None, |best: Option<&AlignmentCandidate<F>>, c| match best {
        Some(b) if !c.beats(b) => Some(b),
        _ => Some(c),
    })
}

/// Highest-scoring candidate, leftmost-shortest on ties. `None` only for an
/// empty candidate list.
pub fn best_candidate<F: Real>(
    candidates: &[CandidateSpan],
    translated_answer: &str,
    sim: &dyn Similarity<F>,
) -> Result<Option<AlignmentCandidate<F>>, BackendError> {
    let scored = score_candidates(candidates, translated_answer, sim)?;
    Ok(pick_best(&scored).cloned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceMode {
    /// Accept when `score >= (1 - tolerance) * reference`.
    #[default]
    Relative,
    /// Accept when `score >= reference - tolerance`.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionReference {
    /// Compare against the best score seen so far, including accepted
    /// extensions.
    #[default]
    RunningMax,
    /// Compare against the base span's score only.
    Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    pub max_tokens: usize,
    pub tolerance: f64,
    pub tolerance_mode: ToleranceMode,
    pub reference: ExtensionReference,
    /// Alignments whose best score falls below this are rejected.
    pub min_score: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            max_tokens: 40,
            tolerance: 0.01,
            tolerance_mode: ToleranceMode::Relative,
            reference: ExtensionReference::RunningMax,
            min_score: 0.5,
        }
    }
}

impl AlignConfig {
    fn threshold<F: Real>(&self, reference: F) -> F {
        let tol = F::lit(self.tolerance);
        match self.tolerance_mode {
            ToleranceMode::Relative => (F::one() - tol) * reference,
            ToleranceMode::Absolute => reference - tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One round of the extension loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionStep<F> {
    pub left: Option<AlignmentCandidate<F>>,
    pub right: Option<AlignmentCandidate<F>>,
    pub threshold: F,
    pub accepted: Option<Side>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extension<F> {
    pub candidate: AlignmentCandidate<F>,
    pub steps: Vec<ExtensionStep<F>>,
}

/// Grow `base` by neighbouring tokens. Each round scores the span extended
/// one token left and one token right, takes the better of the two (right
/// on a tie) and accepts it if it clears the tolerance threshold. The span
/// never shrinks and the loop runs at most once per token.
pub fn extend_answer<F: Real>(
    base: &AlignmentCandidate<F>,
    s: &TokenizedSentence,
    translated_answer: &str,
    sim: &dyn Similarity<F>,
    cfg: &AlignConfig,
) -> Result<Extension<F>, BackendError> {
    let mut current = base.clone();
    let mut running_max = base.score.value();
    let mut steps = Vec::new();
    let n = s.len();
    loop {
        let (first, last) = (current.span.first_token, current.span.last_token);
        let mut spans = Vec::new();
        if first > 0 {
            spans.push((Side::Left, s.span(first - 1, last)));
        }
        if last + 1 < n {
            spans.push((Side::Right, s.span(first, last + 1)));
        }
        if spans.is_empty() {
            break;
        }
        let texts: Vec<&str> = spans.iter().map(|(_, c)| c.text.as_str()).collect();
        let scores = sim.score_matrix(&texts, translated_answer)?;
        let mut left = None;
        let mut right = None;
        for ((side, span), score) in spans.into_iter().zip(scores) {
            let cand = AlignmentCandidate { span, score };
            match side {
                Side::Left => left = Some(cand),
                Side::Right => right = Some(cand),
            }
        }
        let better = match (&left, &right) {
            (Some(l), Some(r)) if l.score.value() > r.score.value() => Side::Left,
            (Some(_), None) => Side::Left,
            _ => Side::Right,
        };
        let reference = match cfg.reference {
            ExtensionReference::RunningMax => running_max,
            ExtensionReference::Base => base.score.value(),
        };
        let threshold = cfg.threshold(reference);
        let chosen = if better == Side::Left { &left } else { &right };
        let accept = chosen.as_ref().is_some_and(|c| c.score.value() >= threshold);
        let next = accept.then(|| chosen.clone()).flatten();
        steps.push(ExtensionStep { left, right, threshold, accepted: accept.then_some(better) });
        match next {
            Some(c) => {
                running_max = running_max.max(c.score.value());
                current = c;
            }
            None => break,
        }
    }
    Ok(Extension { candidate: current, steps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentResult<F> {
    pub span_text: String,
    pub char_start: usize,
    pub char_end: usize,
    pub score: SimilarityScore<F>,
    pub extended: bool,
    pub exact_match: bool,
}

#[derive(Debug, Clone, Error)]
pub enum AlignError {
    #[error("no alignment: best score {best_score:.4} is below the minimum {min_score:.4}")]
    NoAlignment { best_score: f64, min_score: f64 },
    #[error("cannot align an empty sentence or answer")]
    EmptyInput,
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Everything the alignment looked at, for debugging.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentTrace<F> {
    pub sentence: String,
    pub translated_answer: String,
    pub exact_match: bool,
    pub scored: Vec<AlignmentCandidate<F>>,
    pub base: Option<AlignmentCandidate<F>>,
    pub steps: Vec<ExtensionStep<F>>,
    pub result: Option<AlignmentResult<F>>,
    pub failure: Option<String>,
}

impl<F: Real> AlignmentTrace<F> {
    fn new(sentence: &str, translated_answer: &str) -> Self {
        AlignmentTrace {
            sentence: sentence.into(),
            translated_answer: translated_answer.into(),
            exact_match: false,
            scored: Vec::new(),
            base: None,
            steps: Vec::new(),
            result: None,
            failure: None,
        }
    }

    /// Candidates ranked best-first.
    pub fn ranked(&self) -> Vec<&AlignmentCandidate<F>> {
        let mut ranked: Vec<_> = self.scored.iter().collect();
        ranked.sort_by(|a, b| {
            if a.beats(b) {
                std::cmp::Ordering::Less
            } else if b.beats(a) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        ranked
    }

    /// Text form: one `candidate <first> <last> <score>` line per scored
    /// candidate (best-first, at most `top_k` when given), then the
    /// extension rounds and the outcome.
    pub fn render(&self, top_k: Option<usize>) -> String {
        let mut out = String::new();
        let fmt_side = |c: &Option<AlignmentCandidate<F>>| match c {
            Some(c) => format!("{}..{}:{:.6}", c.span.first_token, c.span.last_token, c.score.value()),
            None => "-".to_string(),
        };
        let _ = writeln!(out, "sentence\t{}", self.sentence);
        let _ = writeln!(out, "answer\t{}", self.translated_answer);
        if self.exact_match {
            let _ = writeln!(out, "fast-path\texact match");
        }
        let ranked = self.ranked();
        let shown = top_k.unwrap_or(ranked.len()).min(ranked.len());
        for c in &ranked[..shown] {
            let _ = writeln!(
                out,
                "candidate\t{}\t{}\t{:.6}\t{}",
                c.span.first_token,
                c.span.last_token,
                c.score.value(),
                c.span.text
            );
        }
        if ranked.len() > shown {
            let _ = writeln!(out, "...\t{} more candidates", ranked.len() - shown);
        }
        if let Some(b) = &self.base {
            let _ = writeln!(out, "base\t{}\t{}\t{:.6}", b.span.first_token, b.span.last_token, b.score.value());
        }
        for step in &self.steps {
            let verdict = match step.accepted {
                Some(Side::Left) => "accept left",
                Some(Side::Right) => "accept right",
                None => "stop",
            };
            let _ = writeln!(
                out,
                "extend\tleft={}\tright={}\tthreshold={:.6}\t{verdict}",
                fmt_side(&step.left),
                fmt_side(&step.right),
                step.threshold
            );
        }
        if let Some(r) = &self.result {
            let _ = writeln!(
                out,
                "result\t[{}, {})\tscore={:.6}\textended={}\texact={}\t{}",
                r.char_start,
                r.char_end,
                r.score.value(),
                r.extended,
                r.exact_match,
                r.span_text
            );
        }
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "failure\t{f}");
        }
        out
    }
}

fn align_inner<F: Real>(
    sentence: &str,
    translated_answer: &str,
    sim: &dyn Similarity<F>,
    cfg: &AlignConfig,
    trace: &mut AlignmentTrace<F>,
) -> Result<AlignmentResult<F>, AlignError> {
    if sentence.trim().is_empty() || translated_answer.trim().is_empty() {
        return Err(AlignError::EmptyInput);
    }
    if let Some(start) = find_chars(sentence, translated_answer) {
        trace.exact_match = true;
        return Ok(AlignmentResult {
            span_text: translated_answer.to_string(),
            char_start: start,
            char_end: start + char_len(translated_answer),
            score: SimilarityScore::one(),
            extended: false,
            exact_match: true,
        });
    }
    let tokens = tokenize(sentence);
    let candidates = enumerate_candidates(&tokens, cfg.max_tokens);
    trace.scored = score_candidates(&candidates, translated_answer, sim)?;
    let base = pick_best(&trace.scored).cloned().ok_or(AlignError::EmptyInput)?;
    trace.base = Some(base.clone());
    let min_score = F::lit(cfg.min_score);
    if base.score.value() < min_score {
        return Err(AlignError::NoAlignment {
            best_score: base.score.value().to_f64_lossy(),
            min_score: cfg.min_score,
        });
    }
    let ext = extend_answer(&base, &tokens, translated_answer, sim, cfg)?;
    trace.steps = ext.steps;
    let c = ext.candidate;
    Ok(AlignmentResult {
        char_start: tokens.tokens[c.span.first_token].start,
        char_end: tokens.tokens[c.span.last_token].end,
        extended: c.span != base.span,
        span_text: c.span.text,
        score: c.score,
        exact_match: false,
    })
}

pub fn align_answer<F: Real>(
    sentence: &str,
    translated_answer: &str,
    sim: &dyn Similarity<F>,
    cfg: &AlignConfig,
) -> Result<AlignmentResult<F>, AlignError> {
    let mut trace = AlignmentTrace::new(sentence, translated_answer);
    align_inner(sentence, translated_answer, sim, cfg, &mut trace)
}

/// Same as [`align_answer`], also returning the full trace.
pub fn align_answer_traced<F: Real>(
    sentence: &str,
    translated_answer: &str,
    sim: &dyn Similarity<F>,
    cfg: &AlignConfig,
) -> (Result<AlignmentResult<F>, AlignError>, AlignmentTrace<F>) {
    let mut trace = AlignmentTrace::new(sentence, translated_answer);
    let res = align_inner(sentence, translated_answer, sim, cfg, &mut trace);
    match &res {
        Ok(r) => trace.result = Some(r.clone()),
        Err(e) => trace.failure = Some(e.to_string()),
    }
    (res, trace)
}

/// Join translated sentences with single spaces and map an offset inside
/// sentence `sentence_index` to an offset in the joined context.
///
/// Returns `(answer_start, context)`. The span may run past the end of its
/// sentence when it was aligned inside several merged sentences.
pub fn locate_in_context(
    translated_sentences: &[String],
    sentence_index: usize,
    char_start: usize,
    char_end: usize,
) -> (usize, String) {
    debug_assert!(char_start <= char_end);
    let preceding: usize = translated_sentences[..sentence_index].iter().map(|s| char_len(s)).sum();
    (preceding + sentence_index + char_start, translated_sentences.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{CharNgramCosine, ExactMatchSimilarity};

    fn toks(s: &TokenizedSentence) -> Vec<(&str, usize, usize)> {
        s.tokens.iter().map(|t| (t.text.as_str(), t.start, t.end)).collect()
    }

    #[test]
    fn tokenize_offsets() {
        assert_eq!(toks(&tokenize("a bb  c")), vec![("a", 0, 1), ("bb", 2, 4), ("c", 6, 7)]);
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \t ").is_empty());
        let t = tokenize("नमस्ते, दुनिया!");
        assert_eq!(toks(&t), vec![("नमस्ते,", 0, 7), ("दुनिया!", 8, 15)]);
    }

    #[test]
    fn candidate_counts() {
        let three = tokenize("a b c");
        assert_eq!(enumerate_candidates(&three, 100).len(), 6);
        let five = tokenize("a b c d e");
        let c = enumerate_candidates(&five, 2);
        assert_eq!(c.len(), 9);
        assert_eq!((c[0].first_token, c[0].last_token), (0, 0));
        assert_eq!((c[1].first_token, c[1].last_token), (0, 1));
        assert_eq!(c[1].text, "a b");
        assert!(enumerate_candidates(&tokenize(""), 5).is_empty());
    }

    #[test]
    fn best_is_verbatim_and_ties_go_short() {
        let s = tokenize("the quick brown fox");
        let cands = enumerate_candidates(&s, 40);
        let best = best_candidate::<f64>(&cands, "brown", &CharNgramCosine).unwrap().unwrap();
        assert_eq!(best.span.text, "brown");
        assert_eq!(best.score.value(), 1.0);

        // Exact-match similarity gives every candidate 0 except nothing:
        // all tie at 0, so the leftmost single token wins.
        let best = best_candidate::<f64>(&cands, "zzz", &ExactMatchSimilarity).unwrap().unwrap();
        assert_eq!((best.span.first_token, best.span.last_token), (0, 0));
    }

    #[test]
    fn tie_between_lengths_two_and_three() {
        struct Fixed;
        impl Similarity<f64> for Fixed {
            fn name(&self) -> &str {
                "fixed"
            }
            fn similarity(&self, a: &str, _: &str) -> Result<SimilarityScore<f64>, BackendError> {
                Ok(SimilarityScore::new(match a {
                    "b c" | "b c d" => 0.9,
                    _ => 0.1,
                }))
            }
        }
        let s = tokenize("a b c d");
        let best = best_candidate(&enumerate_candidates(&s, 40), "x", &Fixed).unwrap().unwrap();
        assert_eq!(best.span.text, "b c");
    }

    #[test]
    fn extension_no_op_cases() {
        let s = tokenize("alpha beta gamma");
        let cfg = AlignConfig { tolerance: 0.0, ..Default::default() };
        let base = score_candidates::<f64>(&[s.span(1, 1)], "beta", &CharNgramCosine).unwrap().remove(0);
        let ext = extend_answer(&base, &s, "beta", &CharNgramCosine, &cfg).unwrap();
        assert_eq!(ext.candidate.span, base.span);
        assert_eq!(ext.steps.len(), 1);
        assert_eq!(ext.steps[0].accepted, None);

        let whole = score_candidates::<f64>(&[s.span(0, 2)], "beta", &CharNgramCosine).unwrap().remove(0);
        let ext = extend_answer(&whole, &s, "beta", &CharNgramCosine, &cfg).unwrap();
        assert_eq!(ext.candidate.span, whole.span);
        assert!(ext.steps.is_empty());
    }

    #[test]
    fn fast_path_and_no_alignment() {
        let r = align_answer::<f64>("x y z", "y", &CharNgramCosine, &AlignConfig::default()).unwrap();
        assert_eq!((r.char_start, r.char_end, r.exact_match), (2, 3, true));
        assert_eq!(r.score.value(), 1.0);
        let err = align_answer::<f64>("alpha beta gamma", "qqqq", &CharNgramCosine, &AlignConfig::default());
        match err {
            Err(AlignError::NoAlignment { best_score, .. }) => assert_eq!(best_score, 0.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            align_answer::<f64>("", "a", &CharNgramCosine, &AlignConfig::default()),
            Err(AlignError::EmptyInput)
        ));
    }

    #[test]
    fn locate_arithmetic() {
        let one = vec!["abcdef".to_string()];
        assert_eq!(locate_in_context(&one, 0, 3, 4).0, 3);
        let two = vec!["aaaaa".to_string(), "bbbbbbb".to_string()];
        let (start, ctx) = locate_in_context(&two, 1, 2, 4);
        assert_eq!(start, 8);
        assert_eq!(ctx, "aaaaa bbbbbbb");
        assert_eq!(char_slice(&ctx, start, start + 2), Some("bb"));
    }

    #[test]
    fn trace_renders_candidates() {
        let (res, trace) =
            align_answer_traced::<f64>("alpha beta gamma", "betas", &CharNgramCosine, &AlignConfig::default());
        let r = res.unwrap();
        assert_eq!(r.span_text, "beta");
        let text = trace.render(Some(3));
        assert!(text.contains("candidate\t1\t1\t"), "{text}");
        assert!(text.contains("result\t[6, 10)"), "{text}");
        assert_eq!(trace.scored.len(), 6);
    }
}
