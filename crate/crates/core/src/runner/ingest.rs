//! Human baselines: choice tallies (CSV) and recorded board assignments
//! (JSON lines of `{"game": i, "blue": {...}, "orange": {...}}`, each side
//! optional and written in the answer format).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::value::RawValue;

use super::RunnerError;
use crate::answer::wrap_answer;
use crate::bargaining::{parse_assignment_json, Assignment, BargainingBoard, Player};
use crate::game::ChoiceTally;
use crate::tasks::parse_human_tallies;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestKind {
    Tasks,
    Bargaining,
}

impl FromStr for IngestKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tasks" => Ok(IngestKind::Tasks),
            "bargaining" => Ok(IngestKind::Bargaining),
            other => Err(format!("unknown ingest kind {other:?}")),
        }
    }
}

/// One recorded play of a board.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanRecord {
    pub board_index: usize,
    pub blue: Option<Assignment>,
    pub orange: Option<Assignment>,
}

impl HumanRecord {
    pub fn side(&self, player: Player) -> Option<&Assignment> {
        match player {
            Player::Blue => self.blue.as_ref(),
            Player::Orange => self.orange.as_ref(),
        }
    }
}

/// Recorded assignments, replayed per board in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HumanHistory {
    records: Vec<HumanRecord>,
}

impl HumanHistory {
    pub fn records(&self) -> &[HumanRecord] {
        &self.records
    }

    fn for_board(&self, player: Player, board_index: usize) -> impl Iterator<Item = &Assignment> {
        self.records
            .iter()
            .filter(move |r| r.board_index == board_index)
            .filter_map(move |r| r.side(player))
    }

    /// The `occurrence`-th recorded assignment of `player` on the board,
    /// wrapping around when the board was played more often than recorded.
    pub fn assignment(
        &self,
        player: Player,
        board_index: usize,
        occurrence: usize,
    ) -> Result<&Assignment, RunnerError> {
        let found: Vec<&Assignment> = self.for_board(player, board_index).collect();
        if found.is_empty() {
            return Err(RunnerError::Config(format!(
                "no recorded {player} assignment for board {board_index}"
            )));
        }
        Ok(found[occurrence % found.len()])
    }

    /// Checks that every board used by a run has a recording for `player`.
    pub fn check_covers(
        &self,
        player: Player,
        num_boards: usize,
        iterations: u32,
    ) -> Result<(), RunnerError> {
        for b in 0..num_boards.min(iterations as usize) {
            self.assignment(player, b, 0)?;
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHumanRecord<'a> {
    game: usize,
    #[serde(borrow, default)]
    blue: Option<&'a RawValue>,
    #[serde(borrow, default, alias = "yellow")]
    orange: Option<&'a RawValue>,
}

/// Parses a human history against the board set it was played on.
pub fn parse_human_history(
    text: &str,
    boards: &[BargainingBoard],
) -> Result<HumanHistory, RunnerError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |reason: String| RunnerError::Ingest(format!("line {}: {reason}", i + 1));
        let raw: RawHumanRecord = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        let board = boards
            .get(raw.game)
            .ok_or_else(|| fail(format!("game {} is not in the board set", raw.game)))?;
        let side = |v: Option<&RawValue>| {
            v.map(|v| parse_assignment_json(&wrap_answer(v.get()), board))
                .transpose()
                .map_err(|e| fail(e.to_string()))
        };
        let record = HumanRecord {
            board_index: raw.game,
            blue: side(raw.blue)?,
            orange: side(raw.orange)?,
        };
        if record.blue.is_none() && record.orange.is_none() {
            return Err(fail("record has neither a blue nor an orange assignment".into()));
        }
        records.push(record);
    }
    Ok(HumanHistory { records })
}

pub fn load_human_history(
    path: &Path,
    boards: &[BargainingBoard],
) -> Result<HumanHistory, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
    parse_human_history(&text, boards).map_err(|e| match e {
        RunnerError::Ingest(m) => RunnerError::Ingest(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Tallies(BTreeMap<String, ChoiceTally>),
    History(HumanHistory),
}

/// Validates a human-data file. Board histories need the board set.
pub fn ingest_human_data(
    path: &Path,
    kind: IngestKind,
    boards: Option<&[BargainingBoard]>,
) -> Result<Ingested, RunnerError> {
    match kind {
        IngestKind::Tasks => {
            let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
            parse_human_tallies(&text)
                .map(Ingested::Tallies)
                .map_err(|e| RunnerError::Ingest(format!("{}: {e}", path.display())))
        }
        IngestKind::Bargaining => {
            let boards = boards.ok_or_else(|| {
                RunnerError::Config("bargaining histories need a board set".into())
            })?;
            load_human_history(path, boards).map(Ingested::History)
        }
    }
}
