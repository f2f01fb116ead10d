use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{score_joint, Assignment, BargainingBoard, BargainingError, Player};
use crate::stats::{mean, median};

/// How "payoff lost" is counted for a conflicted disc of value v.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayoffLostMode {
    /// The penalty the pair actually paid: 0.4 v.
    #[default]
    Penalty,
    /// Welfare forgone relative to agreeing on the disc: 1.4 v.
    Shortfall,
}

impl FromStr for PayoffLostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "penalty" => Ok(PayoffLostMode::Penalty),
            "shortfall" => Ok(PayoffLostMode::Shortfall),
            other => Err(format!("unknown payoff-lost mode {other:?}")),
        }
    }
}

impl fmt::Display for PayoffLostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayoffLostMode::Penalty => "penalty",
            PayoffLostMode::Shortfall => "shortfall",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerStats {
    pub total: f64,
    pub mean: f64,
    pub median: f64,
}

impl PlayerStats {
    fn from_payoffs(xs: &[f64]) -> Self {
        Self {
            total: xs.iter().sum(),
            mean: mean(xs).unwrap_or(0.0),
            median: median(xs).unwrap_or(0.0),
        }
    }
}

/// Running totals after each iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionPoint {
    pub iteration: usize,
    pub missed_nash: usize,
    pub payoff_lost_penalty: f64,
    pub payoff_lost_shortfall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionMetrics {
    pub iterations: usize,
    pub blue: PlayerStats,
    pub orange: PlayerStats,
    pub welfare: f64,
    pub missed_nash_iterations: usize,
    pub conflicted_disc_count: usize,
    pub payoff_lost_penalty: f64,
    pub payoff_lost_shortfall: f64,
    pub series: Vec<SessionPoint>,
}

impl SessionMetrics {
    pub fn player(&self, p: Player) -> &PlayerStats {
        match p {
            Player::Blue => &self.blue,
            Player::Orange => &self.orange,
        }
    }

    pub fn payoff_lost(&self, mode: PayoffLostMode) -> f64 {
        match mode {
            PayoffLostMode::Penalty => self.payoff_lost_penalty,
            PayoffLostMode::Shortfall => self.payoff_lost_shortfall,
        }
    }
}

/// Aggregates a history of scored iterations.
pub fn session_metrics<'a, I>(history: I) -> Result<SessionMetrics, BargainingError>
where
    I: IntoIterator<Item = (&'a BargainingBoard, &'a Assignment, &'a Assignment)>,
{
    let mut blue = Vec::new();
    let mut orange = Vec::new();
    let mut missed = 0;
    let mut conflicted = 0;
    let mut lost_value = 0.0;
    let mut series = Vec::new();
    for (i, (board, b, o)) in history.into_iter().enumerate() {
        let outcome = score_joint(board, b, o)?;
        blue.push(outcome.blue_payoff);
        orange.push(outcome.orange_payoff);
        if !outcome.is_agreement() {
            missed += 1;
        }
        conflicted += outcome.conflicted_discs.len();
        lost_value += outcome
            .conflicted_discs
            .iter()
            .map(|&d| board.discs()[d].value)
            .sum::<f64>();
        series.push(SessionPoint {
            iteration: i + 1,
            missed_nash: missed,
            payoff_lost_penalty: 2.0 * lost_value / 5.0,
            payoff_lost_shortfall: 7.0 * lost_value / 5.0,
        });
    }
    if blue.is_empty() {
        return Err(BargainingError::EmptyHistory);
    }
    let blue = PlayerStats::from_payoffs(&blue);
    let orange = PlayerStats::from_payoffs(&orange);
    Ok(SessionMetrics {
        iterations: series.len(),
        welfare: blue.total + orange.total,
        blue,
        orange,
        missed_nash_iterations: missed,
        conflicted_disc_count: conflicted,
        payoff_lost_penalty: 2.0 * lost_value / 5.0,
        payoff_lost_shortfall: 7.0 * lost_value / 5.0,
        series,
    })
}
