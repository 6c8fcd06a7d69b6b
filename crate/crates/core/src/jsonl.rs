//! Crash-tolerant JSON-lines logs.
//!
//! Writers append one complete record plus `\n` at a time, so the only
//! damage an interrupted process can leave is a partial final line. Readers
//! drop that line and truncate the file back to the last complete record.
//! An unparseable line anywhere else is reported as corruption.

use std::fs::OpenOptions;
use std::io;
use std::path::Path;

use log::warn;
use serde::de::DeserializeOwned;

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: corrupt record at byte {offset}")]
    Corrupt { path: String, offset: usize },
}

/// Read every complete record, truncating a partial trailing one. A missing
/// file reads as empty.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let io_err = |source| JsonlError::Io { path: path.display().to_string(), source };
    if !path.exists() {
        return Ok(Vec::new());
    }
    let raw = std::fs::read(path).map_err(io_err)?;
    let mut records = Vec::new();
    let mut good_end = 0usize;
    let mut pos = 0usize;
    while pos < raw.len() {
        let newline = raw[pos..].iter().position(|&b| b == b'\n').map(|i| pos + i);
        let next = newline.map_or(raw.len(), |e| e + 1);
        let parsed = newline.and_then(|e| serde_json::from_slice::<T>(&raw[pos..e]).ok());
        match parsed {
            Some(rec) => {
                records.push(rec);
                good_end = next;
            }
            None if next == raw.len() => {
                warn!("{}: dropping partial trailing record ({} bytes)", path.display(), raw.len() - pos);
                break;
            }
            None => return Err(JsonlError::Corrupt { path: path.display().to_string(), offset: pos }),
        }
        pos = next;
    }
    if good_end < raw.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(io_err)?;
        f.set_len(good_end as u64).map_err(io_err)?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn tolerates_only_trailing_damage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log");
        assert!(read_records::<Value>(&p).unwrap().is_empty());
        std::fs::write(&p, "{\"a\":1}\n{\"a\":2}\n{\"a\":").unwrap();
        assert_eq!(read_records::<Value>(&p).unwrap().len(), 2);
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "{\"a\":1}\n{\"a\":2}\n");
        // a complete but unparseable final line is also an interrupted write
        std::fs::write(&p, "{\"a\":1}\nxx\n").unwrap();
        assert_eq!(read_records::<Value>(&p).unwrap().len(), 1);
        std::fs::write(&p, "xx\n{\"a\":1}\n").unwrap();
        assert!(matches!(read_records::<Value>(&p), Err(JsonlError::Corrupt { offset: 0, .. })));
    }
}
