use proptest::prelude::*;
use qaxlate::segment::{find_answer_sentence, split_sentences, Segmenter};
use qaxlate::squad::{parse_dataset, serialize_dataset, validate, Answer, Article, Paragraph, Qa, SquadDataset};
use qaxlate::synthetic;
use qaxlate::text::{char_len, char_slice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[A-Za-z]{1,8}",
        "[0-9]{1,4}(\\.[0-9])?",
        "[अ-ह]{1,5}",
        "[அ-ஹ]{1,4}",
        Just("Dr.".to_string()),
        Just("e.g.".to_string()),
        Just("\"quoted\"".to_string()),
    ]
}

fn sentence() -> impl Strategy<Value = String> {
    (prop::collection::vec(word(), 1..8), prop::sample::select(vec![".", "!", "?", "।", "…", ".\""]))
        .prop_map(|(w, t)| format!("{}{t}", w.join(" ")))
}

fn context() -> impl Strategy<Value = String> {
    (prop::collection::vec(sentence(), 1..6), prop::sample::select(vec![" ", "  ", "\n", " \t"]))
        .prop_map(|(s, sep)| s.join(sep))
}

fn dataset() -> impl Strategy<Value = SquadDataset> {
    prop::collection::vec((context(), any::<u64>(), "[A-Za-zअ-ह ?]{0,20}", any::<bool>()), 1..6).prop_map(|paras| {
        let mut rng = ChaCha8Rng::seed_from_u64(paras.len() as u64);
        let paragraphs = paras
            .into_iter()
            .enumerate()
            .map(|(i, (context, seed, question, impossible))| {
                rng = ChaCha8Rng::seed_from_u64(seed);
                let len = char_len(&context);
                let start = rng.gen_range(0..len);
                let end = rng.gen_range(start + 1..=len);
                let answer =
                    Answer { text: char_slice(&context, start, end).unwrap().to_string(), answer_start: start };
                let qa = if impossible {
                    Qa {
                        question,
                        id: format!("q{i}"),
                        answers: vec![],
                        plausible_answers: Some(vec![answer]),
                        is_impossible: true,
                    }
                } else {
                    Qa {
                        question,
                        id: format!("q{i}"),
                        answers: vec![answer],
                        plausible_answers: None,
                        is_impossible: false,
                    }
                };
                Paragraph { context, qas: vec![qa] }
            })
            .collect();
        SquadDataset { version: "v2.0".into(), articles: vec![Article { title: "t".into(), paragraphs }] }
    })
}

proptest! {
    #[test]
    fn serialization_round_trips(ds in dataset()) {
        prop_assert!(validate(&ds).is_empty());
        let bytes = serialize_dataset(&ds);
        let back = parse_dataset(&bytes).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(serialize_dataset(&back), bytes);
    }

    #[test]
    fn segmentation_is_idempotent_and_offset_exact(ctx in context()) {
        let spans = split_sentences(&ctx);
        prop_assert!(!spans.is_empty());
        let mut prev_end = 0;
        for s in &spans {
            prop_assert_eq!(char_slice(&ctx, s.start, s.end), Some(s.text.as_str()));
            prop_assert!(s.start >= prev_end);
            prev_end = s.end;
            let again = split_sentences(&s.text);
            prop_assert_eq!(again.len(), 1, "{:?}", s.text);
            prop_assert_eq!(&again[0].text, &s.text);
        }
        // everything outside the spans is whitespace
        let covered: usize = spans.iter().map(|s| s.end - s.start).sum();
        let non_ws = ctx.chars().filter(|c| !c.is_whitespace()).count();
        let non_ws_in_spans: usize = spans.iter().map(|s| s.text.chars().filter(|c| !c.is_whitespace()).count()).sum();
        prop_assert!(covered <= char_len(&ctx));
        prop_assert_eq!(non_ws, non_ws_in_spans);
    }
}

/// Independent statement of the contract: the smallest sentence range that
/// overlaps the answer.
fn oracle_range(spans: &[(usize, usize)], start: usize, end: usize) -> Option<(usize, usize)> {
    let hits: Vec<usize> = (0..spans.len()).filter(|&i| spans[i].0 < end && start < spans[i].1).collect();
    Some((*hits.first()?, *hits.last()?))
}

#[test]
fn answer_sentence_range_matches_oracle_and_contains_answer() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    for seed in 0..60 {
        let ds = synthetic::corpus(seed, 40);
        for p in ds.articles.iter().flat_map(|a| &a.paragraphs) {
            let spans = split_sentences(&p.context);
            let pairs: Vec<(usize, usize)> = spans.iter().map(|s| (s.start, s.end)).collect();
            let len = char_len(&p.context);
            for _ in 0..3 {
                let start = rng.gen_range(0..len);
                let end = rng.gen_range(start + 1..=len.min(start + 40));
                let got = find_answer_sentence(&spans, start, end - start).ok().map(|r| (*r.start(), *r.end()));
                assert_eq!(got, oracle_range(&pairs, start, end));
                if let Some((f, l)) = got {
                    // every non-space answer character lies inside the range
                    for (i, c) in p.context.chars().enumerate().take(end).skip(start) {
                        if !c.is_whitespace() {
                            assert!(spans[f].start <= i && i < spans[l].end);
                        }
                    }
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 1000, "{checked}");
}

#[test]
fn abbreviation_file_extends_the_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("abbrev.txt");
    std::fs::write(&path, "# custom\nvol.\n\nfig.\n").unwrap();
    let seg = Segmenter::from_abbreviation_file(&path).unwrap();
    let spans = seg.split_sentences("See fig. 3 in vol. 2. Next one.");
    assert_eq!(spans.len(), 2);
    assert_eq!(split_sentences("See fig. 3 here.").len(), 2);
}
