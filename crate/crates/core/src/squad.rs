//! SQuAD 2.0 data model: parsing, canonical serialization, validation and
//! corpus statistics.
//!
//! `answer_start` is a **code-point** offset into the paragraph context, the
//! same convention the official SQuAD files use (they were produced by Python
//! string indexing). See [`crate::text`] for the helpers that honour it.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{char_len, char_slice};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (first bad byte at offset {valid_up_to})")]
    Encoding { valid_up_to: usize },
    #[error("malformed input at `{path}`: {message}")]
    Malformed { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquadDataset {
    pub version: String,
    #[serde(rename = "data")]
    pub articles: Vec<Article>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub title: String,
    pub paragraphs: Vec<Paragraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub context: String,
    pub qas: Vec<Qa>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qa {
    pub question: String,
    pub id: String,
    pub answers: Vec<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plausible_answers: Option<Vec<Answer>>,
    pub is_impossible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    /// Code-point offset into the enclosing context.
    pub answer_start: usize,
}

impl Answer {
    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }
}

impl Default for SquadDataset {
    fn default() -> Self {
        SquadDataset { version: "v2.0".to_string(), articles: Vec::new() }
    }
}

impl SquadDataset {
    pub fn qas(&self) -> impl Iterator<Item = &Qa> {
        self.articles.iter().flat_map(|a| a.paragraphs.iter()).flat_map(|p| p.qas.iter())
    }

    pub fn num_qas(&self) -> usize {
        self.articles.iter().map(Article::num_qas).sum()
    }
}

impl Article {
    pub fn num_qas(&self) -> usize {
        self.paragraphs.iter().map(|p| p.qas.len()).sum()
    }
}

/// Parse a SQuAD 2.0 document. Unknown fields are ignored.
pub fn parse_dataset(raw: &[u8]) -> Result<SquadDataset, ParseError> {
    let text = std::str::from_utf8(raw).map_err(|e| ParseError::Encoding { valid_up_to: e.valid_up_to() })?;
    let mut de = serde_json::Deserializer::from_str(text);
    let ds: SquadDataset = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        ParseError::Malformed { path, message: e.into_inner().to_string() }
    })?;
    de.end().map_err(|e| ParseError::Malformed { path: ".".into(), message: e.to_string() })?;
    Ok(ds)
}

/// Serialize with a fixed field order and compact formatting, so equal
/// datasets always produce identical bytes.
pub fn serialize_dataset(ds: &SquadDataset) -> Vec<u8> {
    serde_json::to_vec(ds).expect("dataset serialization is infallible")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ViolationKind {
    OffsetOutOfRange { answer: usize, plausible: bool, start: usize, len: usize, context_len: usize },
    TextMismatch { answer: usize, plausible: bool, expected: String, found: String },
    ImpossibleWithAnswers { count: usize },
    AnswerableWithoutAnswers,
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub qa_id: String,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let which = |plausible: &bool| if *plausible { "plausible answer" } else { "answer" };
        match &self.kind {
            ViolationKind::OffsetOutOfRange { answer, plausible, start, len, context_len } => write!(
                f,
                "{}: {} {answer} spans [{start}, {}) but context has {context_len} characters",
                self.qa_id,
                which(plausible),
                start + len
            ),
            ViolationKind::TextMismatch { answer, plausible, expected, found } => write!(
                f,
                "{}: {} {answer} text {expected:?} does not match context slice {found:?}",
                self.qa_id,
                which(plausible)
            ),
            ViolationKind::ImpossibleWithAnswers { count } => {
                write!(f, "{}: marked impossible but has {count} answer(s)", self.qa_id)
            }
            ViolationKind::AnswerableWithoutAnswers => {
                write!(f, "{}: answerable but has no answers", self.qa_id)
            }
            ViolationKind::DuplicateId => write!(f, "{}: duplicate question id", self.qa_id),
        }
    }
}

fn check_answers(
    qa_id: &str,
    context: &str,
    context_len: usize,
    answers: &[Answer],
    plausible: bool,
    out: &mut Vec<Violation>,
) {
    for (idx, ans) in answers.iter().enumerate() {
        let len = ans.char_len();
        let end = ans.answer_start + len;
        if end > context_len {
            out.push(Violation {
                qa_id: qa_id.to_string(),
                kind: ViolationKind::OffsetOutOfRange {
                    answer: idx,
                    plausible,
                    start: ans.answer_start,
                    len,
                    context_len,
                },
            });
            continue;
        }
        let found = char_slice(context, ans.answer_start, end).unwrap_or_default();
        if found != ans.text {
            out.push(Violation {
                qa_id: qa_id.to_string(),
                kind: ViolationKind::TextMismatch {
                    answer: idx,
                    plausible,
                    expected: ans.text.clone(),
                    found: found.to_string(),
                },
            });
        }
    }
}

/// Check every structural invariant; an empty result means the dataset is
/// well formed.
pub fn validate(ds: &SquadDataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for para in ds.articles.iter().flat_map(|a| &a.paragraphs) {
        let context_len = char_len(&para.context);
        for qa in &para.qas {
            if !seen.insert(qa.id.as_str()) {
                out.push(Violation { qa_id: qa.id.clone(), kind: ViolationKind::DuplicateId });
            }
            if qa.is_impossible && !qa.answers.is_empty() {
                out.push(Violation {
                    qa_id: qa.id.clone(),
                    kind: ViolationKind::ImpossibleWithAnswers { count: qa.answers.len() },
                });
            }
            if !qa.is_impossible && qa.answers.is_empty() {
                out.push(Violation { qa_id: qa.id.clone(), kind: ViolationKind::AnswerableWithoutAnswers });
            }
            check_answers(&qa.id, &para.context, context_len, &qa.answers, false, &mut out);
            if let Some(plausible) = &qa.plausible_answers {
                check_answers(&qa.id, &para.context, context_len, plausible, true, &mut out);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub num_articles: usize,
    pub num_paragraphs: usize,
    pub num_qas: usize,
    pub num_impossible: usize,
    /// `num_impossible / num_qas`, or 0 for an empty dataset.
    pub pct_impossible: f64,
}

pub fn stats(ds: &SquadDataset) -> DatasetStats {
    let num_paragraphs = ds.articles.iter().map(|a| a.paragraphs.len()).sum();
    let num_qas = ds.num_qas();
    let num_impossible = ds.qas().filter(|q| q.is_impossible).count();
    let pct_impossible = if num_qas == 0 { 0.0 } else { num_impossible as f64 / num_qas as f64 };
    DatasetStats { num_articles: ds.articles.len(), num_paragraphs, num_qas, num_impossible, pct_impossible }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_qa(context: &str, text: &str, start: usize, impossible: bool) -> SquadDataset {
        let answers = if text.is_empty() { vec![] } else { vec![Answer { text: text.into(), answer_start: start }] };
        SquadDataset {
            version: "v2.0".into(),
            articles: vec![Article {
                title: "t".into(),
                paragraphs: vec![Paragraph {
                    context: context.into(),
                    qas: vec![Qa {
                        question: "q?".into(),
                        id: "q1".into(),
                        answers,
                        plausible_answers: None,
                        is_impossible: impossible,
                    }],
                }],
            }],
        }
    }

    const MINIMAL: &str = r#"{"version":"v2.0","data":[{"title":"T","paragraphs":[
        {"context":"abc def","qas":[{"id":"a","question":"Q?","is_impossible":false,
        "answers":[{"text":"def","answer_start":4}]}]}]}]}"#;

    #[test]
    fn parses_minimal_file() {
        let ds = parse_dataset(MINIMAL.as_bytes()).unwrap();
        assert_eq!(ds.num_qas(), 1);
        assert_eq!(stats(&ds).num_qas, 1);
        assert!(validate(&ds).is_empty());
    }

    #[test]
    fn parses_impossible_question() {
        let raw = r#"{"version":"v2.0","data":[{"title":"T","paragraphs":[{"context":"x",
            "qas":[{"id":"a","question":"Q?","is_impossible":true,"answers":[],
            "plausible_answers":[{"text":"x","answer_start":0}]}]}]}]}"#;
        let ds = parse_dataset(raw.as_bytes()).unwrap();
        let qa = ds.qas().next().unwrap();
        assert!(qa.is_impossible);
        assert!(qa.answers.is_empty());
        assert_eq!(qa.plausible_answers.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let raw = r#"{"version":"v2.0","extra":1,"data":[{"title":"T","wiki":"x","paragraphs":[]}]}"#;
        let ds = parse_dataset(raw.as_bytes()).unwrap();
        assert_eq!(ds.articles[0].title, "T");
    }

    #[test]
    fn missing_field_reports_path() {
        let raw = r#"{"version":"v2.0","data":[{"title":"T","paragraphs":[{"context":"x","qas":[{"id":"a","question":"Q","answers":[]}]}]}]}"#;
        match parse_dataset(raw.as_bytes()) {
            Err(ParseError::Malformed { path, message }) => {
                assert_eq!(path, "data[0].paragraphs[0].qas[0]");
                assert!(message.contains("is_impossible"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_json_and_bad_utf8() {
        assert!(matches!(parse_dataset(b"{\"version\":"), Err(ParseError::Malformed { .. })));
        assert!(matches!(parse_dataset(b"{\"version\":\"\xff\"}"), Err(ParseError::Encoding { valid_up_to: 12 })));
        assert!(matches!(parse_dataset(b"{\"version\":\"v\",\"data\":[]} x"), Err(ParseError::Malformed { .. })));
    }

    #[test]
    fn empty_dataset_serializes_to_empty_data() {
        let ds = SquadDataset::default();
        assert_eq!(serialize_dataset(&ds), br#"{"version":"v2.0","data":[]}"#);
        let s = stats(&ds);
        assert_eq!((s.num_articles, s.num_qas, s.num_impossible), (0, 0, 0));
        assert_eq!(s.pct_impossible, 0.0);
    }

    #[test]
    fn canonical_field_order() {
        let ds = parse_dataset(MINIMAL.as_bytes()).unwrap();
        let out = String::from_utf8(serialize_dataset(&ds)).unwrap();
        assert_eq!(
            out,
            r#"{"version":"v2.0","data":[{"title":"T","paragraphs":[{"context":"abc def","qas":[{"question":"Q?","id":"a","answers":[{"text":"def","answer_start":4}],"is_impossible":false}]}]}]}"#
        );
    }

    #[test]
    fn offset_checks() {
        assert!(validate(&one_qa("abc def", "def", 4, false)).is_empty());
        let v = validate(&one_qa("abc def", "def", 3, false));
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0].kind, ViolationKind::TextMismatch { .. }));
        assert_eq!(v[0].qa_id, "q1");
        let v = validate(&one_qa("abc def", "def", 5, false));
        assert!(matches!(v[0].kind, ViolationKind::OffsetOutOfRange { .. }));
    }

    #[test]
    fn offsets_count_code_points() {
        let ctx = "भारत की राजधानी दिल्ली है";
        let start = ctx.chars().take_while(|_| true).count() - "दिल्ली है".chars().count();
        assert!(validate(&one_qa(ctx, "दिल्ली", start, false)).is_empty());
    }

    #[test]
    fn impossible_with_answers_and_duplicates() {
        let v = validate(&one_qa("abc def", "def", 4, true));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::ImpossibleWithAnswers { count: 1 });

        let mut ds = one_qa("abc def", "def", 4, false);
        let dup = ds.articles[0].paragraphs[0].qas[0].clone();
        ds.articles[0].paragraphs[0].qas.push(dup);
        let v = validate(&ds);
        assert_eq!(v, vec![Violation { qa_id: "q1".into(), kind: ViolationKind::DuplicateId }]);

        let v = validate(&one_qa("abc", "", 0, false));
        assert_eq!(v[0].kind, ViolationKind::AnswerableWithoutAnswers);
    }

    #[test]
    fn stats_one_third_impossible() {
        let mut ds = one_qa("abc def", "def", 4, false);
        let para = &mut ds.articles[0].paragraphs[0];
        let mut q2 = para.qas[0].clone();
        q2.id = "q2".into();
        let mut q3 = para.qas[0].clone();
        q3.id = "q3".into();
        q3.answers.clear();
        q3.is_impossible = true;
        para.qas.extend([q2, q3]);
        let s = stats(&ds);
        assert_eq!((s.num_articles, s.num_paragraphs, s.num_qas, s.num_impossible), (1, 1, 3, 1));
        assert!((s.pct_impossible - 1.0 / 3.0).abs() < 1e-12);
    }
}
