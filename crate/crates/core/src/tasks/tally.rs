//! Human choice tallies: CSV rows of `question_id,option_label,count`.
//!
//! An optional header row is skipped. Options appear in first-seen order, and
//! every row listed for a question counts toward its option total `m`, so
//! zero-count options should be listed explicitly.

use std::collections::BTreeMap;
use std::path::Path;

use super::TaskError;
use crate::game::ChoiceTally;

pub fn load_human_tallies(path: &Path) -> Result<BTreeMap<String, ChoiceTally>, TaskError> {
    let text = std::fs::read_to_string(path).map_err(|source| TaskError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_human_tallies(&text)
}

pub fn parse_human_tallies(text: &str) -> Result<BTreeMap<String, ChoiceTally>, TaskError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: BTreeMap<String, (Vec<String>, Vec<u64>)> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 1;
        let record = record.map_err(|e| TaskError::Tally {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(TaskError::Tally {
                line,
                reason: format!("expected 3 fields, found {}", record.len()),
            });
        }
        if i == 0 && record[2].eq_ignore_ascii_case("count") {
            continue;
        }
        let (question, label, raw_count) = (&record[0], &record[1], &record[2]);
        if question.is_empty() || label.is_empty() {
            return Err(TaskError::Tally {
                line,
                reason: "empty question id or option label".to_string(),
            });
        }
        let count: u64 = raw_count.parse().map_err(|_| TaskError::Tally {
            line,
            reason: format!("count {raw_count:?} is not a non-negative integer"),
        })?;
        let (labels, counts) = rows.entry(question.to_string()).or_default();
        if labels.iter().any(|l| l == label) {
            return Err(TaskError::Tally {
                line,
                reason: format!("option {label:?} of {question} listed twice"),
            });
        }
        labels.push(label.to_string());
        counts.push(count);
    }
    rows.into_iter()
        .map(|(q, (labels, counts))| Ok((q, ChoiceTally::new(labels, counts)?)))
        .collect()
}
