use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bargaining::IterationRecord;
use super::RunnerError;
use crate::tasks::TrialRecord;

/// One persisted line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Record {
    Trial(TrialRecord),
    Iteration(IterationRecord),
}

fn parse_lines(path: &Path, text: &str) -> Result<Vec<Record>, RunnerError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| RunnerError::Record {
                path: path.display().to_string(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Reads every record of a JSON-lines file.
pub fn read_records(path: &Path) -> Result<Vec<Record>, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
    parse_lines(path, &text)
}

/// Reads the records of an interrupted run. An unterminated final line is
/// cut from the file, since it was being written when the run stopped.
pub(crate) fn recover_records(path: &Path) -> Result<Vec<Record>, RunnerError> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(RunnerError::io(path, e)),
    };
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if keep < bytes.len() {
        tracing::warn!(path = %path.display(), dropped = bytes.len() - keep, "truncating partial record");
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| RunnerError::io(path, e))?;
        f.set_len(keep as u64).map_err(|e| RunnerError::io(path, e))?;
    }
    let text = String::from_utf8_lossy(&bytes[..keep]);
    parse_lines(path, &text)
}

/// Appends records in a fixed canonical order regardless of the order in
/// which results arrive.
pub(crate) struct OrderedWriter {
    path: PathBuf,
    file: File,
    next: usize,
    pending: BTreeMap<usize, Option<Record>>,
    written: usize,
    limit: Option<usize>,
}

impl OrderedWriter {
    pub fn open(path: &Path, limit: Option<usize>) -> Result<Self, RunnerError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| RunnerError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            next: 0,
            pending: BTreeMap::new(),
            written: 0,
            limit,
        })
    }

    pub fn limit_reached(&self) -> bool {
        self.limit.is_some_and(|l| self.written >= l)
    }

    /// Queues the result for slot `index`; `None` marks a slot that produces
    /// no record. Writes every ready prefix.
    pub fn submit(&mut self, index: usize, record: Option<Record>) -> Result<(), RunnerError> {
        self.pending.insert(index, record);
        self.drain(false)
    }

    fn drain(&mut self, all: bool) -> Result<(), RunnerError> {
        while !self.limit_reached() {
            let key = match self.pending.first_key_value() {
                Some((&k, _)) if k == self.next || all => k,
                _ => break,
            };
            if let Some(record) = self.pending.remove(&key).flatten() {
                self.write(&record)?;
            }
            self.next = key + 1;
        }
        Ok(())
    }

    fn write(&mut self, record: &Record) -> Result<(), RunnerError> {
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| RunnerError::io(&self.path, e))?;
        self.written += 1;
        Ok(())
    }

    /// Writes whatever is still queued, in slot order, skipping gaps left by
    /// items that never finished.
    pub fn finish(mut self) -> Result<usize, RunnerError> {
        self.drain(true)?;
        Ok(self.written)
    }
}
