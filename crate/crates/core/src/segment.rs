//! Rule-based sentence segmentation with code-point offsets.
//!
//! A sentence ends at a terminator (`.`, `!`, `?`, `…`, danda `।`, double
//! danda `॥`), optionally followed by closing quotes or brackets, when the
//! next character is whitespace or the end of the text. A `.` does not end a
//! sentence when the word it closes is a known abbreviation or (optionally) a
//! single-letter initial. Because a terminator must be followed by
//! whitespace, `3.14` never splits.

use std::collections::HashSet;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::char_len;

const TERMINATORS: &[char] = &['.', '!', '?', '…', '\u{0964}', '\u{0965}'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '”', '’', '»'];

pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "ft.", "vs.", "e.g.", "i.e.", "inc.", "ltd.",
    "co.", "corp.", "no.", "gen.", "col.", "lt.", "sgt.", "capt.", "rev.", "hon.", "gov.", "sen.", "rep.", "jan.",
    "feb.", "mar.", "apr.", "aug.", "sept.", "sep.", "oct.", "nov.", "dec.", "approx.", "ca.", "cf.", "al.",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub text: String,
    /// Code-point offset of the first character.
    pub start: usize,
    /// Exclusive code-point end offset.
    pub end: usize,
}

impl SentenceSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmenter {
    abbreviations: HashSet<String>,
    /// Treat a single letter followed by `.` (as in "John F. Kennedy") as
    /// an initial rather than a sentence end.
    pub initials: bool,
}

#[derive(Debug, Error)]
#[error("answer span [{start}, {end}) touches no sentence")]
pub struct AnswerOutsideContext {
    pub start: usize,
    pub end: usize,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Segmenter {
    pub fn with_abbreviations<I, S>(abbrevs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations =
            abbrevs.into_iter().map(|a| a.as_ref().trim().to_lowercase()).filter(|a| !a.is_empty()).collect();
        Segmenter { abbreviations, initials: true }
    }

    /// Load an abbreviation list, one entry per line. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_abbreviation_file(path: &Path) -> std::io::Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        Ok(Self::with_abbreviations(raw.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))))
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> {
        self.abbreviations.iter().map(String::as_str)
    }

    fn is_abbreviation(&self, word: &[char]) -> bool {
        // Strip opening punctuation such as "(Dr." before lookup.
        let start = word.iter().position(|c| c.is_alphanumeric()).unwrap_or(word.len());
        let word = &word[start..];
        if word.is_empty() {
            return false;
        }
        if self.initials && word.len() == 2 && word[0].is_alphabetic() && word[0].is_uppercase() {
            return true;
        }
        let lower: String = word.iter().collect::<String>().to_lowercase();
        self.abbreviations.contains(&lower)
    }

    pub fn split_sentences(&self, context: &str) -> Vec<SentenceSpan> {
        let chars: Vec<char> = context.chars().collect();
        let n = chars.len();
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        let mut word_start = 0;
        let mut i = 0;
        while i < n {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                word_start = i;
                continue;
            }
            if start.is_none() {
                start = Some(i);
            }
            if TERMINATORS.contains(&c) {
                let mut j = i + 1;
                while j < n && (TERMINATORS.contains(&chars[j]) || CLOSERS.contains(&chars[j])) {
                    j += 1;
                }
                let at_boundary = j == n || chars[j].is_whitespace();
                let abbrev = c == '.' && j == i + 1 && self.is_abbreviation(&chars[word_start..j]);
                if at_boundary && !abbrev {
                    let s = start.take().unwrap_or(i);
                    spans.push(SentenceSpan { text: chars[s..j].iter().collect(), start: s, end: j });
                }
                i = j;
                continue;
            }
            i += 1;
        }
        if let Some(s) = start {
            let mut end = n;
            while end > s && chars[end - 1].is_whitespace() {
                end -= 1;
            }
            spans.push(SentenceSpan { text: chars[s..end].iter().collect(), start: s, end });
        }
        spans
    }
}

/// Split with the default abbreviation list.
pub fn split_sentences(context: &str) -> Vec<SentenceSpan> {
    Segmenter::default().split_sentences(context)
}

/// Minimal inclusive range of sentence indices whose spans cover the answer
/// `[answer_start, answer_start + answer_len)`. A zero-length answer is
/// located by the sentence containing its start offset.
pub fn find_answer_sentence(
    sentences: &[SentenceSpan],
    answer_start: usize,
    answer_len: usize,
) -> Result<RangeInclusive<usize>, AnswerOutsideContext> {
    let answer_end = answer_start + answer_len;
    let touches = |s: &SentenceSpan| {
        if answer_len == 0 {
            s.start <= answer_start && answer_start < s.end
        } else {
            s.start < answer_end && answer_start < s.end
        }
    };
    let first = sentences.iter().position(touches);
    let last = sentences.iter().rposition(touches);
    match (first, last) {
        (Some(f), Some(l)) => Ok(f..=l),
        _ => Err(AnswerOutsideContext { start: answer_start, end: answer_end }),
    }
}

/// Text covered by a sentence range, taken verbatim from the context.
pub fn range_text<'a>(context: &'a str, sentences: &[SentenceSpan], range: &RangeInclusive<usize>) -> &'a str {
    let start = sentences[*range.start()].start;
    let end = sentences[*range.end()].end;
    crate::text::char_slice(context, start, end).unwrap_or_default()
}

/// Sum of code-point lengths, used by tests and callers that rebuild text.
pub fn total_len(sentences: &[SentenceSpan]) -> usize {
    sentences.iter().map(|s| char_len(&s.text)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::char_slice;

    fn offsets(spans: &[SentenceSpan]) -> Vec<(usize, usize)> {
        spans.iter().map(|s| (s.start, s.end)).collect()
    }

    #[test]
    fn two_simple_sentences() {
        let spans = split_sentences("A b. C d.");
        assert_eq!(offsets(&spans), vec![(0, 4), (5, 9)]);
        assert_eq!(spans[1].text, "C d.");
    }

    #[test]
    fn no_terminator_gives_trimmed_single_span() {
        let spans = split_sentences("  no terminator here  ");
        assert_eq!(offsets(&spans), vec![(2, 20)]);
        assert_eq!(spans[0].text, "no terminator here");
    }

    #[test]
    fn whitespace_only_yields_nothing() {
        assert!(split_sentences(" \n ").is_empty());
    }

    #[test]
    fn abbreviations_do_not_split() {
        let spans = split_sentences("Mr. Smith went. He left.");
        assert_eq!(spans.iter().map(|s| s.text.as_str()).collect::<Vec<_>>(), ["Mr. Smith went.", "He left."]);
        let plain = Segmenter::with_abbreviations(Vec::<String>::new());
        assert_eq!(plain.split_sentences("Mr. Smith went. He left.").len(), 3);
    }

    #[test]
    fn abbreviation_fixtures() {
        let cases: &[(&str, &[&str])] = &[
            ("Dr. Who arrived. (Prof. X agreed.) Done", &["Dr. Who arrived.", "(Prof. X agreed.)", "Done"]),
            ("It cost 3.5 million. Really!", &["It cost 3.5 million.", "Really!"]),
            ("John F. Kennedy spoke. Then left", &["John F. Kennedy spoke.", "Then left"]),
            ("He said \"stop.\" She did. Wait...  ok?", &["He said \"stop.\"", "She did.", "Wait...", "ok?"]),
            ("Version 2.0.1 shipped e.g. today.", &["Version 2.0.1 shipped e.g. today."]),
        ];
        for (input, expect) in cases {
            let got: Vec<_> = split_sentences(input).into_iter().map(|s| s.text).collect();
            assert_eq!(&got, expect, "input {input:?}");
        }
    }

    #[test]
    fn indic_terminators_and_offsets() {
        let ctx = "भारत एक देश है। दिल्ली राजधानी है॥ अंत";
        let spans = split_sentences(ctx);
        assert_eq!(spans.len(), 3);
        for s in &spans {
            assert_eq!(char_slice(ctx, s.start, s.end), Some(s.text.as_str()));
        }
        assert!(spans[0].text.ends_with('।'));
    }

    #[test]
    fn answer_sentence_lookup() {
        let spans = split_sentences("One two. Three four. Five six.");
        assert_eq!(find_answer_sentence(&spans, 0, 3).unwrap(), 0..=0);
        // "four. Five" straddles sentences 1 and 2
        assert_eq!(find_answer_sentence(&spans, 15, 10).unwrap(), 1..=2);
        assert!(find_answer_sentence(&spans, 8, 1).is_err());
        assert_eq!(find_answer_sentence(&spans, 9, 0).unwrap(), 1..=1);
    }

    #[test]
    fn abbreviation_file_loading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abbr.txt");
        std::fs::write(&path, "# comment\nApprox.\n\n  Fig.  \n").unwrap();
        let seg = Segmenter::from_abbreviation_file(&path).unwrap();
        let mut got: Vec<_> = seg.abbreviations().collect();
        got.sort();
        assert_eq!(got, ["approx.", "fig."]);
        assert_eq!(seg.split_sentences("See Fig. 3 now. Ok").len(), 2);
    }
}
