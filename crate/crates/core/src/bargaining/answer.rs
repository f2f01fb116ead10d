//! The JSON answer format: `{"(row,col)": "blue" | "yellow", …}` inside
//! answer tags.

use std::fmt;

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use thiserror::Error;

use super::{Assignment, BargainingBoard, Coord, Player};
use crate::answer::last_answer_span;

/// Failure classes of an answer parse. Retry policy keys off these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswerFailure {
    MissingAnswer,
    MalformedJson,
    InvalidKey,
    UnknownDisc,
    DuplicateDisc,
    MissingDisc,
    UnknownColor,
}

impl AnswerFailure {
    /// Whether re-asking the same agent is worthwhile. Every class is a
    /// formatting slip a fresh sample can fix.
    pub fn is_retryable(self) -> bool {
        true
    }
}

impl fmt::Display for AnswerFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AnswerFailure::MissingAnswer => "missing-answer",
            AnswerFailure::MalformedJson => "malformed-json",
            AnswerFailure::InvalidKey => "invalid-key",
            AnswerFailure::UnknownDisc => "unknown-disc",
            AnswerFailure::DuplicateDisc => "duplicate-disc",
            AnswerFailure::MissingDisc => "missing-disc",
            AnswerFailure::UnknownColor => "unknown-color",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{class}: {detail}")]
pub struct AnswerParseError {
    pub class: AnswerFailure,
    pub detail: String,
}

impl AnswerParseError {
    fn new(class: AnswerFailure, detail: impl Into<String>) -> Self {
        Self {
            class,
            detail: detail.into(),
        }
    }
}

/// Object entries in source order, duplicates kept.
struct Entries(Vec<(String, serde_json::Value)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Entries, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, serde_json::Value>()? {
                    out.push(entry);
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V)
    }
}

fn parse_key(key: &str) -> Option<Coord> {
    let compact: String = key.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact.strip_prefix('(')?.strip_suffix(')')?;
    let (r, c) = inner.split_once(',')?;
    Some(Coord::new(r.parse().ok()?, c.parse().ok()?))
}

/// Parses the last answer span of `text` into an attribution for `board`.
pub fn parse_assignment_json(
    text: &str,
    board: &BargainingBoard,
) -> Result<Assignment, AnswerParseError> {
    let body = last_answer_span(text)
        .ok_or_else(|| AnswerParseError::new(AnswerFailure::MissingAnswer, "no <answer> span"))?;
    let Entries(entries) = serde_json::from_str(body.trim())
        .map_err(|e| AnswerParseError::new(AnswerFailure::MalformedJson, e.to_string()))?;

    let mut slots: Vec<Option<Player>> = vec![None; board.num_discs()];
    for (key, value) in entries {
        let pos = parse_key(&key).ok_or_else(|| {
            AnswerParseError::new(AnswerFailure::InvalidKey, format!("key {key:?}"))
        })?;
        let disc = board.disc_at(pos).ok_or_else(|| {
            AnswerParseError::new(AnswerFailure::UnknownDisc, format!("no disc at {pos}"))
        })?;
        let player = value
            .as_str()
            .and_then(|s| s.parse::<Player>().ok())
            .ok_or_else(|| {
                AnswerParseError::new(AnswerFailure::UnknownColor, format!("value {value}"))
            })?;
        if slots[disc].replace(player).is_some() {
            return Err(AnswerParseError::new(
                AnswerFailure::DuplicateDisc,
                format!("disc at {pos} listed twice"),
            ));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.ok_or_else(|| {
                AnswerParseError::new(
                    AnswerFailure::MissingDisc,
                    format!("disc at {} not assigned", board.discs()[i].pos),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Assignment::new)
}

/// Renders an attribution as the answer JSON object (without tags), in disc order.
pub fn render_assignment_json(board: &BargainingBoard, assignment: &Assignment) -> String {
    let body: Vec<String> = board
        .discs()
        .iter()
        .zip(assignment.as_slice())
        .map(|(d, p)| format!("\"({},{})\":\"{}\"", d.pos.row, d.pos.col, p.answer_color()))
        .collect();
    format!("{{{}}}", body.join(","))
}
