use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use qaxlate::metrics::{evaluate as score, parse_predictions, EvalReport, MetricsError};
use qaxlate::pipeline::{inspect_qa, Pipeline, PipelineError};
use qaxlate::squad::{parse_dataset, serialize_dataset, stats as dataset_stats, validate as check, SquadDataset};
use qaxlate::synthetic;
use qaxlate::Scalar;
use serde::Serialize;

use crate::config::CliConfig;
use crate::CliError;

pub struct Crash {
    pub after: usize,
    pub partial: bool,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<SquadDataset, CliError> {
    parse_dataset(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Write through a sibling temporary file so readers never see a torn file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn validate(input: &Path) -> Result<(), CliError> {
    let ds = load(input)?;
    let violations = check(&ds);
    for v in &violations {
        println!("{v}");
    }
    println!("{} violations", violations.len());
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Domain(format!("{}: {} violations", input.display(), violations.len())))
    }
}

#[derive(Serialize)]
struct StatsRow {
    file: String,
    #[serde(flatten)]
    stats: qaxlate::squad::DatasetStats,
}

pub fn stats(inputs: &[PathBuf]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for path in inputs {
        rows.push(StatsRow { file: path.display().to_string(), stats: dataset_stats(&load(path)?) });
    }
    let width = rows.iter().map(|r| r.file.chars().count()).max().unwrap_or(0).max(4);
    println!(
        "{:<width$}  {:>8}  {:>10}  {:>8}  {:>10}  {:>7}",
        "file", "articles", "paragraphs", "qas", "impossible", "%imp"
    );
    for r in &rows {
        let s = &r.stats;
        println!(
            "{:<width$}  {:>8}  {:>10}  {:>8}  {:>10}  {:>7.2}",
            r.file,
            s.num_articles,
            s.num_paragraphs,
            s.num_qas,
            s.num_impossible,
            100.0 * s.pct_impossible
        );
    }
    println!("{}", serde_json::to_string_pretty(&rows).expect("stats serialize"));
    Ok(())
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Backend { .. } => CliError::Backend(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

pub fn translate(
    cfg: &CliConfig,
    input: &Path,
    output: &Path,
    progress: Option<PathBuf>,
    report: Option<PathBuf>,
    restart: bool,
    crash: Option<Crash>,
) -> Result<(), CliError> {
    let ds = load(input)?;
    let pcfg = cfg.pipeline_config()?;
    let backends = cfg.backends()?;
    let progress = progress.unwrap_or_else(|| with_suffix(output, ".progress.jsonl"));
    let report_path = report.unwrap_or_else(|| with_suffix(output, ".report.json"));
    if restart && progress.exists() {
        fs::remove_file(&progress).map_err(|e| CliError::Input(format!("{}: {e}", progress.display())))?;
    }
    let mut pipeline = Pipeline::new(&pcfg, &backends).with_progress_file(&progress);
    if let Some(crash) = crash {
        pipeline = pipeline.on_commit(move |done, path| {
            if done >= crash.after {
                if crash.partial {
                    if let Ok(mut f) = OpenOptions::new().append(true).open(path) {
                        let _ = f.write_all(br#"{"article_index": "#);
                    }
                }
                std::process::abort();
            }
        });
    }
    let (out, rep) = pipeline.run(&ds).map_err(pipeline_error)?;
    write_atomic(output, &serialize_dataset(&out))?;
    write_atomic(&report_path, &to_json(&rep))?;
    info!("wrote {} and {}", output.display(), report_path.display());
    println!("{}", rep.summary());
    Ok(())
}

fn metrics_error(e: MetricsError) -> CliError {
    match e {
        MetricsError::EmptyCorpus => CliError::Input(e.to_string()),
        _ => CliError::Domain(e.to_string()),
    }
}

fn mismatches(got: &EvalReport<Scalar>, expected: &serde_json::Value) -> Vec<String> {
    let got = serde_json::to_value(got).expect("report serializes");
    let mut out = Vec::new();
    let Some(fields) = expected.as_object() else {
        return vec!["expected report is not a JSON object".into()];
    };
    for (key, want) in fields {
        let have = &got[key];
        let ok = match (want.as_f64(), have.as_f64()) {
            (Some(w), Some(h)) => (w - h).abs() <= 0.01,
            _ => want == have,
        };
        if !ok {
            out.push(format!("{key}: expected {want}, got {have}"));
        }
    }
    out
}

pub fn evaluate(
    cfg: &CliConfig,
    dataset: &Path,
    predictions: &Path,
    report: Option<PathBuf>,
    expect: Option<&Path>,
) -> Result<(), CliError> {
    let ds = load(dataset)?;
    let preds = parse_predictions(&read(predictions)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", predictions.display())))?;
    let rep: EvalReport<Scalar> = score(&preds, &ds, cfg.metrics).map_err(metrics_error)?;
    let label = dataset.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    print!("{}", rep.table(&label));
    let report_path = report.unwrap_or_else(|| predictions.with_extension("eval.json"));
    write_atomic(&report_path, &to_json(&rep))?;
    if let Some(expect) = expect {
        let want: serde_json::Value = serde_json::from_slice(&read(expect)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", expect.display())))?;
        let bad = mismatches(&rep, &want);
        for m in &bad {
            println!("mismatch\t{m}");
        }
        if !bad.is_empty() {
            return Err(CliError::Domain(format!("{} metric(s) differ from {}", bad.len(), expect.display())));
        }
        println!("matches {}", expect.display());
    }
    Ok(())
}

pub fn inspect(cfg: &CliConfig, input: &Path, qa_id: &str, top_k: Option<usize>) -> Result<(), CliError> {
    let ds = load(input)?;
    let found = ds
        .articles
        .iter()
        .flat_map(|a| &a.paragraphs)
        .find_map(|p| p.qas.iter().find(|q| q.id == qa_id).map(|q| (p, q)));
    let Some((paragraph, qa)) = found else {
        return Err(CliError::Domain(format!("unknown question id {qa_id}")));
    };
    let pcfg = cfg.pipeline_config()?;
    let backends = cfg.backends()?;
    let ins = inspect_qa(qa, paragraph, &pcfg, &backends).map_err(|e| CliError::Backend(e.to_string()))?;
    println!("id\t{}", qa.id);
    println!("question\t{}", qa.question);
    println!("translated question\t{}", ins.question);
    if ins.answers.is_empty() {
        println!("no answers{}", if qa.is_impossible { " (unanswerable)" } else { "" });
    }
    for (i, a) in ins.answers.iter().enumerate() {
        let end = a.source.answer_start + a.source.char_len();
        println!("== answer {i}");
        println!("source answer\t[{}, {end})\t{}", a.source.answer_start, a.source.text);
        match &a.sentences {
            Some(r) => println!("sentences\t{}..={}", r.start(), r.end()),
            None => println!("sentences\tnone (answer outside the segmented context)"),
        }
        println!("source sentence\t{}", a.source_text);
        println!("translated sentence\t{}", a.translated_text);
        if let Some(trace) = &a.trace {
            print!("{}", trace.render(top_k));
        }
        match &a.emitted {
            Some(e) => println!("offsets\t[{}, {})\t{}", e.answer_start, e.answer_start + e.char_len(), e.text),
            None => println!("offsets\tnone (dropped)"),
        }
    }
    Ok(())
}

pub fn synth(output: &Path, seed: u64, qas: usize) -> Result<(), CliError> {
    let ds = synthetic::corpus(seed, qas);
    write_atomic(output, &serialize_dataset(&ds))?;
    println!("wrote {} questions to {}", ds.num_qas(), output.display());
    Ok(())
}
