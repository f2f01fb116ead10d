use std::collections::BTreeMap;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgentError, PromptContext};
use crate::answer::wrap_answer;
use crate::bargaining::{render_assignment_json, Assignment, Player};

/// Labels a scripted policy chooses between on a board, per disc.
pub const BOARD_LABELS: [&str; 2] = ["blue", "yellow"];

/// Deterministic stand-in for a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ScriptedPolicy {
    FixedLabel { label: String },
    FirstDisplayed,
    /// Samples a label per response; the stream is keyed by `seed` and the
    /// trial seed.
    Distribution {
        weights: BTreeMap<String, f64>,
        seed: u64,
    },
}

impl ScriptedPolicy {
    pub fn validate(&self) -> Result<(), AgentError> {
        if let ScriptedPolicy::Distribution { weights, .. } = self {
            if weights.is_empty() {
                return Err(AgentError::Policy("empty distribution".into()));
            }
            if let Some((l, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
                return Err(AgentError::Policy(format!("weight {w} for {l:?} is not >= 0")));
            }
            let total: f64 = weights.values().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(AgentError::Policy(format!(
                    "probabilities sum to {total}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            ScriptedPolicy::FixedLabel { label } => format!("fixed-label({label})"),
            ScriptedPolicy::FirstDisplayed => "first-displayed".to_string(),
            ScriptedPolicy::Distribution { .. } => "distribution".to_string(),
        }
    }

    fn sampler(
        weights: &BTreeMap<String, f64>,
        seed: u64,
        trial_seed: u64,
    ) -> Result<(Vec<&String>, WeightedIndex<f64>, ChaCha8Rng), AgentError> {
        let (labels, ws): (Vec<&String>, Vec<f64>) = weights.iter().map(|(l, w)| (l, *w)).unzip();
        let index = WeightedIndex::new(ws).map_err(|e| AgentError::Policy(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial_seed);
        Ok((labels, index, rng))
    }
}

/// Answer text in the format the matching parser expects: `<answer>label</answer>`
/// for option lists, the tagged disc-colour JSON for boards.
pub fn scripted_respond(
    context: PromptContext<'_>,
    policy: &ScriptedPolicy,
    trial_seed: u64,
) -> Result<String, AgentError> {
    policy.validate()?;
    match context {
        PromptContext::Options(displayed) => {
            respond_options(displayed, policy, trial_seed).map(|l| wrap_answer(&l))
        }
        PromptContext::Board { board, .. } => {
            let n = board.num_discs();
            let assignment = match policy {
                ScriptedPolicy::FixedLabel { label } => {
                    Assignment::uniform(n, board_player(label)?)
                }
                ScriptedPolicy::FirstDisplayed => Assignment::uniform(n, Player::Blue),
                ScriptedPolicy::Distribution { weights, seed } => {
                    for label in weights.keys() {
                        board_player(label)?;
                    }
                    let (labels, index, mut rng) =
                        ScriptedPolicy::sampler(weights, *seed, trial_seed)?;
                    let picks = (0..n)
                        .map(|_| board_player(labels[index.sample(&mut rng)]))
                        .collect::<Result<Vec<_>, _>>()?;
                    Assignment::new(picks)
                }
            };
            Ok(wrap_answer(&render_assignment_json(board, &assignment)))
        }
    }
}

fn respond_options(
    displayed: &[String],
    policy: &ScriptedPolicy,
    trial_seed: u64,
) -> Result<String, AgentError> {
    match policy {
        ScriptedPolicy::FixedLabel { label } => {
            if displayed.iter().any(|d| d == label) {
                Ok(label.clone())
            } else {
                Err(AgentError::Policy(format!("label {label:?} is not displayed")))
            }
        }
        ScriptedPolicy::FirstDisplayed => displayed
            .first()
            .cloned()
            .ok_or_else(|| AgentError::Policy("no options displayed".into())),
        ScriptedPolicy::Distribution { weights, seed } => {
            if let Some(missing) = weights
                .iter()
                .find(|(l, w)| **w > 0.0 && !displayed.contains(l))
            {
                return Err(AgentError::Policy(format!(
                    "label {:?} is not displayed",
                    missing.0
                )));
            }
            let (labels, index, mut rng) = ScriptedPolicy::sampler(weights, *seed, trial_seed)?;
            Ok(labels[index.sample(&mut rng)].clone())
        }
    }
}

fn board_player(label: &str) -> Result<Player, AgentError> {
    Player::from_str(label)
        .map_err(|_| AgentError::Policy(format!("{label:?} is not a board colour")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bargaining::{parse_assignment_json, tests::game_one};
    use crate::tasks::{parse_answer, permute_options, tests::tn1};

    fn opts(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    fn dist(pairs: &[(&str, f64)], seed: u64) -> ScriptedPolicy {
        ScriptedPolicy::Distribution {
            weights: pairs.iter().map(|(l, w)| (l.to_string(), *w)).collect(),
            seed,
        }
    }

    #[test]
    fn first_displayed_follows_permutation() {
        let q = tn1();
        let shown: Vec<String> = permute_options(&q, 7).into_iter().map(|o| o.label).collect();
        let r = scripted_respond(PromptContext::Options(&shown), &ScriptedPolicy::FirstDisplayed, 0)
            .unwrap();
        assert_eq!(r, format!("<answer>{}</answer>", shown[0]));
        assert_eq!(parse_answer(&r, &q).as_deref(), Some(shown[0].as_str()));
    }

    #[test]
    fn degenerate_distribution() {
        let shown = opts(&["A", "B"]);
        let p = dist(&[("A", 1.0)], 3);
        for s in 0..100 {
            assert_eq!(
                scripted_respond(PromptContext::Options(&shown), &p, s).unwrap(),
                "<answer>A</answer>"
            );
        }
    }

    #[test]
    fn even_distribution_frequency() {
        let shown = opts(&["A", "B"]);
        let p = dist(&[("A", 0.5), ("B", 0.5)], 11);
        let a = (0..10_000u64)
            .filter(|&s| {
                scripted_respond(PromptContext::Options(&shown), &p, s).unwrap()
                    == "<answer>A</answer>"
            })
            .count();
        let share = a as f64 / 10_000.0;
        assert!((share - 0.5).abs() <= 0.02, "share {share}");
    }

    #[test]
    fn deterministic_per_seed() {
        let shown = opts(&["A", "B", "C"]);
        let p = dist(&[("A", 0.2), ("B", 0.3), ("C", 0.5)], 1);
        for s in 0..50 {
            let ctx = PromptContext::Options(&shown);
            assert_eq!(
                scripted_respond(ctx, &p, s).unwrap(),
                scripted_respond(ctx, &p, s).unwrap()
            );
        }
    }

    #[test]
    fn policy_errors() {
        let shown = opts(&["A", "B"]);
        let ctx = PromptContext::Options(&shown);
        let fixed = ScriptedPolicy::FixedLabel { label: "Z".into() };
        assert!(matches!(scripted_respond(ctx, &fixed, 0), Err(AgentError::Policy(_))));
        assert!(scripted_respond(ctx, &dist(&[("A", 0.5), ("B", 0.4)], 0), 0).is_err());
        assert!(scripted_respond(ctx, &dist(&[("A", 0.5), ("Z", 0.5)], 0), 0).is_err());
        assert!(scripted_respond(ctx, &dist(&[("A", 1.5), ("B", -0.5)], 0), 0).is_err());
        assert!(scripted_respond(PromptContext::Options(&[]), &ScriptedPolicy::FirstDisplayed, 0)
            .is_err());
    }

    #[test]
    fn board_answers_round_trip() {
        let board = game_one();
        let ctx = PromptContext::Board { board: &board, me: Player::Blue };
        let yellow = ScriptedPolicy::FixedLabel { label: "yellow".into() };
        let r = scripted_respond(ctx, &yellow, 0).unwrap();
        assert_eq!(
            parse_assignment_json(&r, &board).unwrap(),
            Assignment::uniform(5, Player::Orange)
        );
        let r = scripted_respond(ctx, &ScriptedPolicy::FirstDisplayed, 0).unwrap();
        assert_eq!(
            parse_assignment_json(&r, &board).unwrap(),
            Assignment::uniform(5, Player::Blue)
        );
        let p = dist(&[("blue", 0.5), ("yellow", 0.5)], 4);
        for s in 0..20 {
            let r = scripted_respond(ctx, &p, s).unwrap();
            assert_eq!(parse_assignment_json(&r, &board).unwrap().len(), 5);
        }
        let bad = ScriptedPolicy::FixedLabel { label: "green".into() };
        assert!(scripted_respond(ctx, &bad, 0).is_err());
    }

    #[test]
    fn serde_tagging() {
        let p: ScriptedPolicy =
            serde_json::from_str(r#"{"rule":"fixed-label","label":"Saturday night"}"#).unwrap();
        assert_eq!(p, ScriptedPolicy::FixedLabel { label: "Saturday night".into() });
        let p: ScriptedPolicy = serde_json::from_str(r#"{"rule":"first-displayed"}"#).unwrap();
        assert_eq!(p, ScriptedPolicy::FirstDisplayed);
    }
}
