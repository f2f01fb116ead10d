//! The Bargaining Table: a 9×9 board with two player squares and valued
//! discs that both players attribute simultaneously.
//!
//! A disc both players attribute to the same player pays that player its
//! value. A disagreement costs each player a fifth of the disc's value.

mod answer;
mod metrics;
mod prompt;
mod strategy;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameError, NormalFormGame};

pub use answer::{parse_assignment_json, render_assignment_json, AnswerFailure, AnswerParseError};
pub use metrics::{session_metrics, PayoffLostMode, PlayerStats, SessionMetrics, SessionPoint};
pub use prompt::{describe_state, render_bargaining_prompt, BargainingVariant};
pub use strategy::{
    strategy_cooperative, strategy_greedy, strategy_svo, StrategyKind, SVO_PROSOCIAL_THRESHOLD_DEG,
};

pub const BOARD_SIZE: u8 = 9;

/// Largest disc count `enumerate_bargaining_nash` accepts.
pub const MAX_NASH_DISCS: usize = 12;

#[derive(Debug, Error)]
pub enum BargainingError {
    #[error("invalid board: {0}")]
    InvalidBoard(String),
    #[error("assignment covers {got} discs, board has {expected}")]
    InvalidAssignment { expected: usize, got: usize },
    #[error("board has {discs} discs; enumeration is limited to {max}")]
    Capacity { discs: usize, max: usize },
    #[error("session history is empty")]
    EmptyHistory,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("reading board file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing board file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Grid coordinate; row 1 is the top row, column 1 the leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(u8, u8)", into = "(u8, u8)")]
pub struct Coord {
    pub row: u8,
    pub col: u8,
}

impl Coord {
    pub const fn new(row: u8, col: u8) -> Self {
        Self { row, col }
    }

    fn in_bounds(self) -> bool {
        (1..=BOARD_SIZE).contains(&self.row) && (1..=BOARD_SIZE).contains(&self.col)
    }

    /// Squared Euclidean distance.
    pub fn dist2(self, other: Coord) -> u32 {
        let dr = self.row.abs_diff(other.row) as u32;
        let dc = self.col.abs_diff(other.col) as u32;
        dr * dr + dc * dc
    }
}

impl From<(u8, u8)> for Coord {
    fn from((row, col): (u8, u8)) -> Self {
        Self { row, col }
    }
}

impl From<Coord> for (u8, u8) {
    fn from(c: Coord) -> Self {
        (c.row, c.col)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// One of the two seats. The prompt calls the orange player "Yellow";
/// `yellow` is accepted wherever a player name is parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Blue,
    #[serde(alias = "yellow")]
    Orange,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Blue => Player::Orange,
            Player::Orange => Player::Blue,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Player::Blue => "blue",
            Player::Orange => "orange",
        }
    }

    /// Lower-case color used in the answer JSON.
    pub fn answer_color(self) -> &'static str {
        match self {
            Player::Blue => "blue",
            Player::Orange => "yellow",
        }
    }

    /// Capitalised name used in prompt prose.
    pub fn prompt_name(self) -> &'static str {
        match self {
            Player::Blue => "Blue",
            Player::Orange => "Yellow",
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Player {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blue" => Ok(Player::Blue),
            "orange" | "yellow" => Ok(Player::Orange),
            other => Err(format!("unknown player color {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub value: f64,
    pub pos: Coord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawBoard {
    blue_square: Coord,
    #[serde(alias = "yellow_square")]
    orange_square: Coord,
    discs: Vec<Disc>,
}

/// A validated board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBoard", into = "RawBoard")]
pub struct BargainingBoard {
    blue_square: Coord,
    orange_square: Coord,
    discs: Vec<Disc>,
}

impl TryFrom<RawBoard> for BargainingBoard {
    type Error = BargainingError;

    fn try_from(raw: RawBoard) -> Result<Self, Self::Error> {
        BargainingBoard::new(raw.blue_square, raw.orange_square, raw.discs)
    }
}

impl From<BargainingBoard> for RawBoard {
    fn from(b: BargainingBoard) -> Self {
        RawBoard {
            blue_square: b.blue_square,
            orange_square: b.orange_square,
            discs: b.discs,
        }
    }
}

impl BargainingBoard {
    pub fn new(
        blue_square: Coord,
        orange_square: Coord,
        discs: Vec<Disc>,
    ) -> Result<Self, BargainingError> {
        let bad = |msg: String| Err(BargainingError::InvalidBoard(msg));
        for (name, c) in [("blue square", blue_square), ("orange square", orange_square)] {
            if !c.in_bounds() {
                return bad(format!("{name} {c} is off the board"));
            }
        }
        if blue_square == orange_square {
            return bad("player squares coincide".to_string());
        }
        if discs.is_empty() {
            return bad("board has no discs".to_string());
        }
        let mut taken = vec![blue_square, orange_square];
        for d in &discs {
            if !d.pos.in_bounds() {
                return bad(format!("disc at {} is off the board", d.pos));
            }
            if !(d.value.is_finite() && d.value > 0.0) {
                return bad(format!("disc at {} has non-positive value {}", d.pos, d.value));
            }
            if taken.contains(&d.pos) {
                return bad(format!("square {} is occupied twice", d.pos));
            }
            taken.push(d.pos);
        }
        Ok(Self {
            blue_square,
            orange_square,
            discs,
        })
    }

    pub fn blue_square(&self) -> Coord {
        self.blue_square
    }

    pub fn orange_square(&self) -> Coord {
        self.orange_square
    }

    pub fn square_of(&self, player: Player) -> Coord {
        match player {
            Player::Blue => self.blue_square,
            Player::Orange => self.orange_square,
        }
    }

    pub fn discs(&self) -> &[Disc] {
        &self.discs
    }

    pub fn num_discs(&self) -> usize {
        self.discs.len()
    }

    pub fn total_value(&self) -> f64 {
        self.discs.iter().map(|d| d.value).sum()
    }

    pub fn disc_at(&self, pos: Coord) -> Option<usize> {
        self.discs.iter().position(|d| d.pos == pos)
    }

    /// Same board with the two player squares exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            blue_square: self.orange_square,
            orange_square: self.blue_square,
            discs: self.discs.clone(),
        }
    }
}

/// Reads a JSON array of boards.
pub fn load_board_set(path: &Path) -> Result<Vec<BargainingBoard>, BargainingError> {
    let text = std::fs::read_to_string(path)?;
    let boards: Vec<BargainingBoard> = serde_json::from_str(&text)?;
    if boards.is_empty() {
        return Err(BargainingError::InvalidBoard("board set is empty".to_string()));
    }
    Ok(boards)
}

/// Per-disc attribution, indexed like the board's disc list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<Player>);

impl Assignment {
    pub fn new(attribution: Vec<Player>) -> Self {
        Self(attribution)
    }

    pub fn uniform(num_discs: usize, player: Player) -> Self {
        Self(vec![player; num_discs])
    }

    /// Bit `i` of `mask` set means disc `i` goes to orange.
    pub fn from_mask(num_discs: usize, mask: u64) -> Self {
        Self(
            (0..num_discs)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        Player::Orange
                    } else {
                        Player::Blue
                    }
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, disc: usize) -> Option<Player> {
        self.0.get(disc).copied()
    }

    pub fn as_slice(&self) -> &[Player] {
        &self.0
    }

    /// Compact code such as `BBOOO`.
    pub fn code(&self) -> String {
        self.0
            .iter()
            .map(|p| match p {
                Player::Blue => 'B',
                Player::Orange => 'O',
            })
            .collect()
    }

    /// Swaps every attribution.
    pub fn mirrored(&self) -> Self {
        Self(self.0.iter().map(|p| p.other()).collect())
    }

    pub fn check_for(&self, board: &BargainingBoard) -> Result<(), BargainingError> {
        if self.len() != board.num_discs() {
            return Err(BargainingError::InvalidAssignment {
                expected: board.num_discs(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointOutcome {
    pub blue_payoff: f64,
    pub orange_payoff: f64,
    pub conflicted_discs: Vec<usize>,
}

impl JointOutcome {
    pub fn welfare(&self) -> f64 {
        self.blue_payoff + self.orange_payoff
    }

    pub fn payoff(&self, player: Player) -> f64 {
        match player {
            Player::Blue => self.blue_payoff,
            Player::Orange => self.orange_payoff,
        }
    }

    pub fn is_agreement(&self) -> bool {
        self.conflicted_discs.is_empty()
    }
}

/// Scores a simultaneous pair of attributions.
///
/// Conflicted values are summed before the one-fifth penalty is taken, so
/// boards with integer disc values score to the correctly rounded decimals.
pub fn score_joint(
    board: &BargainingBoard,
    blue: &Assignment,
    orange: &Assignment,
) -> Result<JointOutcome, BargainingError> {
    blue.check_for(board)?;
    orange.check_for(board)?;
    let mut blue_gain = 0.0;
    let mut orange_gain = 0.0;
    let mut conflicted_value = 0.0;
    let mut conflicted_discs = Vec::new();
    for (i, disc) in board.discs.iter().enumerate() {
        match (blue.0[i], orange.0[i]) {
            (Player::Blue, Player::Blue) => blue_gain += disc.value,
            (Player::Orange, Player::Orange) => orange_gain += disc.value,
            _ => {
                conflicted_value += disc.value;
                conflicted_discs.push(i);
            }
        }
    }
    let penalty = conflicted_value / 5.0;
    Ok(JointOutcome {
        blue_payoff: blue_gain - penalty,
        orange_payoff: orange_gain - penalty,
        conflicted_discs,
    })
}

/// The pure Nash equilibria: exactly the 2^k agreement profiles, in mask order.
///
/// Any disagreement lets the disagreeing player do strictly better by
/// conceding the disc, and at an agreement any unilateral change turns a
/// non-negative outcome into a penalty.
pub fn enumerate_bargaining_nash(
    board: &BargainingBoard,
) -> Result<Vec<(Assignment, Assignment)>, BargainingError> {
    let k = board.num_discs();
    if k > MAX_NASH_DISCS {
        return Err(BargainingError::Capacity {
            discs: k,
            max: MAX_NASH_DISCS,
        });
    }
    Ok((0..1u64 << k)
        .map(|mask| {
            let a = Assignment::from_mask(k, mask);
            (a.clone(), a)
        })
        .collect())
}

/// The board as a two-player normal-form game whose strategies are the 2^k
/// assignment codes of each player.
pub fn bargaining_normal_form(board: &BargainingBoard) -> Result<NormalFormGame, BargainingError> {
    let k = board.num_discs();
    if k > MAX_NASH_DISCS {
        return Err(BargainingError::Capacity {
            discs: k,
            max: MAX_NASH_DISCS,
        });
    }
    let assignments: Vec<Assignment> = (0..1u64 << k).map(|m| Assignment::from_mask(k, m)).collect();
    let codes: Vec<String> = assignments.iter().map(Assignment::code).collect();
    let game = NormalFormGame::from_fn(vec![codes.clone(), codes], |d| {
        let o = score_joint(board, &assignments[d[0]], &assignments[d[1]])
            .expect("assignments built for this board");
        vec![o.blue_payoff, o.orange_payoff]
    })?;
    Ok(game)
}
