//! Progress file: a header line identifying the run, then one JSON record
//! per completed article, appended in article order.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DroppedQa, PipelineError};
use crate::jsonl::read_records;
use crate::squad::Article;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub article_index: usize,
    pub input_qas: usize,
    pub emitted_qas: usize,
    pub drops: Vec<DroppedQa>,
    pub elapsed_ms: u64,
    pub article: Article,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Line {
    Header { fingerprint: String },
    Article(Box<ArticleRecord>),
}

pub struct ProgressLog {
    path: PathBuf,
    file: File,
    completed: Vec<ArticleRecord>,
}

fn ck(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Checkpoint(format!("{}: {e}", path.display()))
}

impl ProgressLog {
    /// Open or create. An existing file must carry the same fingerprint and
    /// hold articles `0, 1, 2, ...` without gaps.
    pub fn open(path: &Path, fingerprint: &str) -> Result<Self, PipelineError> {
        let lines: Vec<Line> = read_records(path).map_err(|e| PipelineError::Checkpoint(e.to_string()))?;
        let mut completed = Vec::new();
        let mut iter = lines.into_iter();
        let fresh = match iter.next() {
            None => true,
            Some(Line::Header { fingerprint: f }) if f == fingerprint => false,
            Some(Line::Header { .. }) => return Err(PipelineError::ProgressMismatch { path: path.to_path_buf() }),
            Some(Line::Article(_)) => return Err(ck(path, "missing header")),
        };
        for line in iter {
            match line {
                Line::Article(rec) if rec.article_index == completed.len() => completed.push(*rec),
                Line::Article(rec) => {
                    return Err(ck(path, format!("expected article {}, found {}", completed.len(), rec.article_index)))
                }
                Line::Header { .. } => return Err(ck(path, "unexpected second header")),
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| ck(path, e))?;
        if fresh {
            let mut line =
                serde_json::to_vec(&Line::Header { fingerprint: fingerprint.to_string() }).map_err(|e| ck(path, e))?;
            line.push(b'\n');
            file.write_all(&line).and_then(|_| file.sync_data()).map_err(|e| ck(path, e))?;
        }
        Ok(ProgressLog { path: path.to_path_buf(), file, completed })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn completed(&self) -> &[ArticleRecord] {
        &self.completed
    }

    pub fn append(&mut self, records: &[ArticleRecord]) -> Result<(), PipelineError> {
        let mut buf = Vec::new();
        for rec in records {
            serde_json::to_writer(&mut buf, &Line::Article(Box::new(rec.clone()))).map_err(|e| ck(&self.path, e))?;
            buf.push(b'\n');
        }
        self.file.write_all(&buf).and_then(|_| self.file.sync_data()).map_err(|e| ck(&self.path, e))?;
        self.completed.extend(records.iter().cloned());
        Ok(())
    }
}
