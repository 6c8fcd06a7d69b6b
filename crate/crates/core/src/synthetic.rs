//! Seeded synthetic corpus for smoke tests and benchmarks.
//!
//! Contexts mix Latin, Devanagari and Tamil words, digits, decimals and
//! abbreviations. Sentences are joined by single spaces, every answer starts
//! on a token boundary, and a few answers cross a sentence boundary. About a
//! third of the questions are unanswerable.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::squad::{Answer, Article, Paragraph, Qa, SquadDataset};
use crate::text::char_len;

const LATIN: &[&str] = &[
    "river", "city", "council", "temple", "railway", "harvest", "festival", "market", "school", "museum", "bridge",
    "monsoon", "library", "fort", "village", "province", "treaty", "empire", "garden", "station", "ancient",
    "northern", "coastal", "famous", "largest", "old", "built", "opened", "crossed", "visited",
];
const NAMES: &[&str] = &["Rao", "Smith", "Iyer", "Patil", "Kumar", "Bose", "Das", "Menon"];
const TITLES: &[&str] = &["Dr.", "Mr.", "Mrs.", "Prof."];
const DEVANAGARI: &[&str] = &["नदी", "शहर", "पुणे", "मंदिर", "महाराष्ट्र", "किल्ला", "गाव"];
const TAMIL: &[&str] = &["சென்னை", "நதி", "கோயில்", "தமிழ்நாடு", "மலை"];
const QUESTION_WORDS: &[&str] = &["What", "Which", "Where", "When", "Who"];

struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

fn word(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..10) {
        0 => DEVANAGARI.choose(rng).unwrap().to_string(),
        1 => TAMIL.choose(rng).unwrap().to_string(),
        2 => rng.gen_range(1200..2030).to_string(),
        3 => format!("{}.{}", rng.gen_range(1..100), rng.gen_range(0..10)),
        _ => LATIN.choose(rng).unwrap().to_string(),
    }
}

fn sentence(rng: &mut ChaCha8Rng) -> Sentence {
    let len = rng.gen_range(5..=12);
    let mut tokens: Vec<String> = Vec::with_capacity(len + 1);
    while tokens.len() < len {
        if rng.gen_bool(0.12) {
            tokens.push(TITLES.choose(rng).unwrap().to_string());
            tokens.push(NAMES.choose(rng).unwrap().to_string());
        } else {
            tokens.push(word(rng));
        }
    }
    let first = &mut tokens[0];
    if let Some(c) = first.chars().next().filter(|c| c.is_ascii_lowercase()) {
        *first = format!("{}{}", c.to_ascii_uppercase(), &first[1..]);
    }
    let last = tokens.last().unwrap();
    let terminator = if last.chars().any(|c| ('\u{0900}'..='\u{097F}').contains(&c)) {
        "।"
    } else {
        [".", ".", ".", "!", "?"].choose(rng).unwrap()
    };
    tokens.last_mut().unwrap().push_str(terminator);
    Sentence { tokens }
}

/// Character offset of each token within the paragraph context.
fn token_offsets(sentences: &[Sentence]) -> Vec<Vec<usize>> {
    let mut pos = 0;
    let mut out = Vec::new();
    for (si, s) in sentences.iter().enumerate() {
        if si > 0 {
            pos += 1;
        }
        let mut offs = Vec::new();
        for (ti, t) in s.tokens.iter().enumerate() {
            if ti > 0 {
                pos += 1;
            }
            offs.push(pos);
            pos += char_len(t);
        }
        out.push(offs);
    }
    out
}

fn strip_terminal(tok: &str) -> &str {
    tok.trim_end_matches(['.', '!', '?', '।'])
}

fn pick_answer(rng: &mut ChaCha8Rng, sentences: &[Sentence], offsets: &[Vec<usize>], context: &str) -> Answer {
    let straddle = sentences.len() > 1 && rng.gen_bool(0.08);
    let (start, text) = if straddle {
        let si = rng.gen_range(0..sentences.len() - 1);
        let last = sentences[si].tokens.last().unwrap();
        let next = strip_terminal(&sentences[si + 1].tokens[0]);
        let start = *offsets[si].last().unwrap();
        (start, format!("{last} {next}"))
    } else {
        let si = rng.gen_range(0..sentences.len());
        let toks = &sentences[si].tokens;
        let first = rng.gen_range(0..toks.len());
        let n = rng.gen_range(1..=4.min(toks.len() - first));
        let mut parts: Vec<&str> = toks[first..first + n].iter().map(String::as_str).collect();
        let tail = parts.pop().unwrap();
        let tail = if first + n == toks.len() { strip_terminal(tail) } else { tail };
        parts.push(if tail.is_empty() { toks[first + n - 1].as_str() } else { tail });
        (offsets[si][first], parts.join(" "))
    };
    debug_assert_eq!(crate::text::char_slice(context, start, start + char_len(&text)), Some(text.as_str()));
    Answer { text, answer_start: start }
}

fn question(rng: &mut ChaCha8Rng, sentences: &[Sentence]) -> String {
    let s = sentences.choose(rng).unwrap();
    let w = strip_terminal(s.tokens.choose(rng).unwrap());
    format!("{} is the {} {w}?", QUESTION_WORDS.choose(rng).unwrap(), LATIN.choose(rng).unwrap())
}

/// Generate a corpus with exactly `num_qas` questions. The same seed always
/// yields the same corpus.
pub fn corpus(seed: u64, num_qas: usize) -> SquadDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut articles = Vec::new();
    let mut made = 0;
    while made < num_qas {
        let mut paragraphs = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            if made == num_qas {
                break;
            }
            let sentences: Vec<Sentence> = (0..rng.gen_range(2..=6)).map(|_| sentence(&mut rng)).collect();
            let context = sentences.iter().map(Sentence::text).collect::<Vec<_>>().join(" ");
            let offsets = token_offsets(&sentences);
            let mut qas = Vec::new();
            for _ in 0..rng.gen_range(2..=5).min(num_qas - made) {
                let id = format!("syn-{seed}-{made:05}");
                made += 1;
                let q = question(&mut rng, &sentences);
                if rng.gen_range(0..3) == 0 {
                    let plausible =
                        rng.gen_bool(0.5).then(|| vec![pick_answer(&mut rng, &sentences, &offsets, &context)]);
                    qas.push(Qa {
                        question: q,
                        id,
                        answers: Vec::new(),
                        plausible_answers: plausible,
                        is_impossible: true,
                    });
                } else {
                    let mut answers = vec![pick_answer(&mut rng, &sentences, &offsets, &context)];
                    if rng.gen_bool(0.15) {
                        answers.push(pick_answer(&mut rng, &sentences, &offsets, &context));
                    }
                    qas.push(Qa { question: q, id, answers, plausible_answers: None, is_impossible: false });
                }
            }
            paragraphs.push(Paragraph { context, qas });
        }
        articles.push(Article { title: format!("Synthetic_{}", articles.len()), paragraphs });
    }
    SquadDataset { version: "v2.0".to_string(), articles }
}
