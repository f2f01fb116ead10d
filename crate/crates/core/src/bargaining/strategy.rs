use serde::{Deserialize, Serialize};

use super::{Assignment, BargainingBoard, Player};

/// Angles strictly above this many degrees count as prosocial.
pub const SVO_PROSOCIAL_THRESHOLD_DEG: f64 = 22.45;

/// How a seat picks its attribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategyKind {
    Greedy,
    Cooperative,
    Svo { angle: f64 },
    Scripted,
    Llm,
}

impl StrategyKind {
    /// Attribution for the rule-based kinds; `None` for scripted and llm
    /// seats, which answer through an agent.
    pub fn assign(&self, board: &BargainingBoard, me: Player) -> Option<Assignment> {
        match *self {
            StrategyKind::Greedy => Some(strategy_greedy(board, me)),
            StrategyKind::Cooperative => Some(strategy_cooperative(board, me)),
            StrategyKind::Svo { angle } => Some(strategy_svo(board, me, angle)),
            StrategyKind::Scripted | StrategyKind::Llm => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            StrategyKind::Greedy => "greedy".to_string(),
            StrategyKind::Cooperative => "cooperative".to_string(),
            StrategyKind::Svo { angle } => format!("svo({angle})"),
            StrategyKind::Scripted => "scripted".to_string(),
            StrategyKind::Llm => "llm".to_string(),
        }
    }
}

/// Every disc to `me`.
pub fn strategy_greedy(board: &BargainingBoard, me: Player) -> Assignment {
    Assignment::uniform(board.num_discs(), me)
}

/// Every disc to the player whose square is nearer (Euclidean); ties go to
/// blue. The result does not depend on which seat computes it.
pub fn strategy_cooperative(board: &BargainingBoard, _me: Player) -> Assignment {
    let blue = board.blue_square();
    let orange = board.orange_square();
    Assignment::new(
        board
            .discs()
            .iter()
            .map(|d| {
                if d.pos.dist2(blue) <= d.pos.dist2(orange) {
                    Player::Blue
                } else {
                    Player::Orange
                }
            })
            .collect(),
    )
}

/// Cooperative above the prosocial threshold, greedy at or below it.
pub fn strategy_svo(board: &BargainingBoard, me: Player, angle: f64) -> Assignment {
    if angle > SVO_PROSOCIAL_THRESHOLD_DEG {
        strategy_cooperative(board, me)
    } else {
        strategy_greedy(board, me)
    }
}
