//! Extractive-QA evaluation: exact match, token F1 (overall and split by
//! answerability) and unigram/bigram BLEU over the has-answer subset.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::real::{round2, Real};
use crate::squad::SquadDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeOptions {
    /// Drop the English articles "a", "an", "the".
    pub remove_articles: bool,
}

fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    c.is_ascii_punctuation()
        || matches!(
            get_general_category(c),
            ConnectorPunctuation
                | DashPunctuation
                | OpenPunctuation
                | ClosePunctuation
                | InitialPunctuation
                | FinalPunctuation
                | OtherPunctuation
        )
}

/// Lowercase, delete punctuation, optionally drop articles, collapse
/// whitespace.
pub fn normalize_answer(text: &str, opts: NormalizeOptions) -> String {
    let lowered = text.to_lowercase();
    let stripped: String = lowered.chars().filter(|&c| !is_punctuation(c)).collect();
    stripped
        .split_whitespace()
        .filter(|w| !(opts.remove_articles && matches!(*w, "a" | "an" | "the")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn tokens(normalized: &str) -> Vec<&str> {
    normalized.split_whitespace().collect()
}

/// Golds that survive normalization; an all-empty list means "no answer".
fn effective_golds(golds: &[&str], opts: NormalizeOptions) -> Vec<String> {
    let g: Vec<String> = golds.iter().map(|g| normalize_answer(g, opts)).filter(|g| !g.is_empty()).collect();
    if g.is_empty() {
        vec![String::new()]
    } else {
        g
    }
}

pub fn exact_match(pred: &str, golds: &[&str], opts: NormalizeOptions) -> bool {
    let p = normalize_answer(pred, opts);
    effective_golds(golds, opts).contains(&p)
}

fn f1_normalized<F: Real>(pred: &str, gold: &str) -> F {
    let (pt, gt) = (tokens(pred), tokens(gold));
    if pt.is_empty() || gt.is_empty() {
        return if pt == gt { F::one() } else { F::zero() };
    }
    let mut gold_counts: HashMap<&str, usize> = HashMap::new();
    for t in &gt {
        *gold_counts.entry(t).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in &pt {
        if let Some(c) = gold_counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return F::zero();
    }
    let precision = F::from_count(overlap) / F::from_count(pt.len());
    let recall = F::from_count(overlap) / F::from_count(gt.len());
    F::lit(2.0) * precision * recall / (precision + recall)
}

/// Token-multiset F1, maximized over golds.
pub fn f1<F: Real>(pred: &str, golds: &[&str], opts: NormalizeOptions) -> F {
    let p = normalize_answer(pred, opts);
    effective_golds(golds, opts).iter().map(|g| f1_normalized::<F>(&p, g)).fold(F::zero(), F::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BleuMode {
    /// Pool clipped n-gram counts and lengths over the whole corpus.
    #[default]
    Corpus,
    /// Average the per-pair BLEU scores.
    SentenceAverage,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no eligible prediction/gold pairs for BLEU")]
    EmptyCorpus,
    #[error("missing prediction for question {0}")]
    MissingPrediction(String),
    #[error("prediction for unknown question {0}")]
    UnknownId(String),
    #[error("duplicate prediction for question {0}")]
    DuplicatePrediction(String),
}

#[derive(Debug, Default, Clone, Copy)]
struct NgramStats {
    matched: [usize; 2],
    total: [usize; 2],
    pred_len: usize,
    ref_len: usize,
}

fn ngram_counts<'a, 'b>(toks: &'b [&'a str], n: usize) -> HashMap<&'b [&'a str], usize> {
    let mut m = HashMap::new();
    if toks.len() >= n {
        for w in toks.windows(n) {
            *m.entry(w).or_default() += 1;
        }
    }
    m
}

fn pair_stats(pred: &[&str], gold: &[&str], max_n: usize) -> NgramStats {
    let mut s = NgramStats { pred_len: pred.len(), ref_len: gold.len(), ..Default::default() };
    for n in 1..=max_n {
        let pc = ngram_counts(pred, n);
        let gc = ngram_counts(gold, n);
        s.matched[n - 1] = pc.iter().map(|(g, &c)| c.min(gc.get(g).copied().unwrap_or(0))).sum();
        s.total[n - 1] = pred.len().saturating_sub(n - 1);
    }
    s
}

fn bleu_from_stats<F: Real>(s: &NgramStats, max_n: usize) -> F {
    let mut log_sum = F::zero();
    for n in 0..max_n {
        if s.matched[n] == 0 || s.total[n] == 0 {
            return F::zero();
        }
        log_sum = log_sum + (F::from_count(s.matched[n]) / F::from_count(s.total[n])).ln();
    }
    let geo = (log_sum / F::from_count(max_n)).exp();
    let ratio = F::from_count(s.ref_len) / F::from_count(s.pred_len);
    let bp = (F::one() - ratio).min(F::zero()).exp();
    geo * bp * F::hundred()
}

/// BLEU (as a percentage) with clipped n-gram precision for orders
/// `1..=max_n` (1 or 2), uniform weights and brevity penalty
/// `exp(min(0, 1 - ref_len / pred_len))`. Inputs are raw strings; both sides
/// are normalized and whitespace-tokenized. Pairs whose prediction
/// normalizes to nothing are skipped.
pub fn bleu<F: Real>(
    pairs: &[(&str, &str)],
    max_n: usize,
    mode: BleuMode,
    opts: NormalizeOptions,
) -> Result<F, MetricsError> {
    assert!((1..=2).contains(&max_n), "BLEU order must be 1 or 2");
    let normalized: Vec<(String, String)> = pairs
        .iter()
        .map(|(p, g)| (normalize_answer(p, opts), normalize_answer(g, opts)))
        .filter(|(p, _)| !p.is_empty())
        .collect();
    if normalized.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let stats: Vec<NgramStats> = normalized.iter().map(|(p, g)| pair_stats(&tokens(p), &tokens(g), max_n)).collect();
    Ok(match mode {
        BleuMode::Corpus => {
            let mut total = NgramStats::default();
            for s in &stats {
                for n in 0..2 {
                    total.matched[n] += s.matched[n];
                    total.total[n] += s.total[n];
                }
                total.pred_len += s.pred_len;
                total.ref_len += s.ref_len;
            }
            bleu_from_stats(&total, max_n)
        }
        BleuMode::SentenceAverage => {
            let sum = stats.iter().fold(F::zero(), |acc, s| acc + bleu_from_stats::<F>(s, max_n));
            sum / F::from_count(stats.len())
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub qa_id: String,
    /// Empty means "no answer".
    pub answer_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub remove_articles: bool,
    pub bleu_mode: BleuMode,
}

impl EvalOptions {
    pub fn normalize(&self) -> NormalizeOptions {
        NormalizeOptions { remove_articles: self.remove_articles }
    }
}

/// Percentages in `[0, 100]`. Splits with no questions report 0; BLEU is
/// `None` when no has-answer question received a non-empty prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport<F> {
    pub em: F,
    pub f1: F,
    pub em_has: F,
    pub f1_has: F,
    pub em_no: F,
    pub f1_no: F,
    pub bleu1: Option<F>,
    pub bleu2: Option<F>,
    pub total: usize,
    pub has_ans_total: usize,
    pub no_ans_total: usize,
    pub bleu_pairs: usize,
}

impl<F: Real> EvalReport<F> {
    pub fn rounded(&self) -> Self {
        EvalReport {
            em: round2(self.em),
            f1: round2(self.f1),
            em_has: round2(self.em_has),
            f1_has: round2(self.f1_has),
            em_no: round2(self.em_no),
            f1_no: round2(self.f1_no),
            bleu1: self.bleu1.map(round2),
            bleu2: self.bleu2.map(round2),
            ..*self
        }
    }

    /// Aligned-column table with the layout of a model-comparison row.
    pub fn table(&self, label: &str) -> String {
        let r = self.rounded();
        let opt = |x: Option<F>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
        let header = ["", "EM%", "F1%", "EM(has)", "F1(has)", "EM(no)", "F1(no)", "BLEU-1%", "BLEU-2%"];
        let row = [
            label.to_string(),
            format!("{:.2}", r.em),
            format!("{:.2}", r.f1),
            format!("{:.2}", r.em_has),
            format!("{:.2}", r.f1_has),
            format!("{:.2}", r.em_no),
            format!("{:.2}", r.f1_no),
            opt(r.bleu1),
            opt(r.bleu2),
        ];
        let widths: Vec<usize> =
            header.iter().zip(&row).map(|(h, v)| h.chars().count().max(v.chars().count())).collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        format!(
            "{}\n{}\ncounts: total={} has_ans={} no_ans={} bleu_pairs={}\n",
            line(&header),
            line(&row),
            self.total,
            self.has_ans_total,
            self.no_ans_total,
            self.bleu_pairs
        )
    }
}

/// Score one prediction per question. Overall EM/F1 average over every
/// question (so they are the count-weighted mean of the two splits).
pub fn evaluate<F: Real>(
    preds: &[Prediction],
    ds: &SquadDataset,
    opts: EvalOptions,
) -> Result<EvalReport<F>, MetricsError> {
    let mut by_id: BTreeMap<&str, &str> = BTreeMap::new();
    for p in preds {
        if by_id.insert(&p.qa_id, &p.answer_text).is_some() {
            return Err(MetricsError::DuplicatePrediction(p.qa_id.clone()));
        }
    }
    let known: HashSet<&str> = ds.qas().map(|q| q.id.as_str()).collect();
    if let Some(unknown) = by_id.keys().find(|id| !known.contains(*id)) {
        return Err(MetricsError::UnknownId(unknown.to_string()));
    }

    let norm = opts.normalize();
    let (mut em_has, mut f1_has, mut em_no, mut f1_no) = (F::zero(), F::zero(), F::zero(), F::zero());
    let (mut n_has, mut n_no) = (0usize, 0usize);
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for qa in ds.qas() {
        let pred = *by_id.get(qa.id.as_str()).ok_or_else(|| MetricsError::MissingPrediction(qa.id.clone()))?;
        let golds: Vec<&str> = qa.answers.iter().map(|a| a.text.as_str()).collect();
        let em = if exact_match(pred, &golds, norm) { F::one() } else { F::zero() };
        let f = f1::<F>(pred, &golds, norm);
        if !qa.answers.is_empty() {
            n_has += 1;
            em_has = em_has + em;
            f1_has = f1_has + f;
            if !normalize_answer(pred, norm).is_empty() {
                // pair with the first gold achieving the best F1
                let p = normalize_answer(pred, norm);
                let mut best: Option<(&str, F)> = None;
                for g in &golds {
                    let s = f1_normalized::<F>(&p, &normalize_answer(g, norm));
                    if best.is_none_or(|(_, b)| s > b) {
                        best = Some((g, s));
                    }
                }
                if let Some((g, _)) = best {
                    pairs.push((pred, g));
                }
            }
        } else {
            n_no += 1;
            em_no = em_no + em;
            f1_no = f1_no + f;
        }
    }
    let pct = |sum: F, n: usize| if n == 0 { F::zero() } else { sum / F::from_count(n) * F::hundred() };
    let total = n_has + n_no;
    let bleu_n = |n| match bleu::<F>(&pairs, n, opts.bleu_mode, norm) {
        Ok(v) => Ok(Some(v)),
        Err(MetricsError::EmptyCorpus) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(EvalReport {
        em: pct(em_has + em_no, total),
        f1: pct(f1_has + f1_no, total),
        em_has: pct(em_has, n_has),
        f1_has: pct(f1_has, n_has),
        em_no: pct(em_no, n_no),
        f1_no: pct(f1_no, n_no),
        bleu1: bleu_n(1)?,
        bleu2: bleu_n(2)?,
        total,
        has_ans_total: n_has,
        no_ans_total: n_no,
        bleu_pairs: pairs.len(),
    })
}

/// Parse a prediction file: a JSON object mapping question id to answer
/// text. Entries come back sorted by id.
pub fn parse_predictions(raw: &[u8]) -> Result<Vec<Prediction>, serde_json::Error> {
    let map: BTreeMap<String, String> = serde_json::from_slice(raw)?;
    Ok(map.into_iter().map(|(qa_id, answer_text)| Prediction { qa_id, answer_text }).collect())
}
