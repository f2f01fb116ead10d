//! Multi-answer coordination questions: question sets, the pick/guess/
//! coordinate templates and their prompt variants, answer parsing, and
//! per-question aggregation.

mod aggregate;
mod parse;
mod prompt;
mod tally;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::GameError;

pub use aggregate::{aggregate_question_stats, QuestionStats, TrialRecord};
pub use parse::parse_answer;
pub use prompt::{render_objects, render_prompt};
pub use tally::{load_human_tallies, parse_human_tallies};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("question {question:?}: {reason}")]
    Load { question: String, reason: String },
    #[error("template error: {0}")]
    Template(String),
    #[error("trial for question {found:?} passed to aggregation of {expected:?}")]
    ForeignTrial { expected: String, found: String },
    #[error("question {question:?} has {valid} valid trials; at least 2 are needed")]
    TooFewValid { question: String, valid: u64 },
    #[error(transparent)]
    Metric(#[from] GameError),
    #[error("tally line {line}: {reason}")]
    Tally { line: u64, reason: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing question set: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Locale {
    #[serde(alias = "amsterdam")]
    Amsterdam,
    #[serde(alias = "nottingham")]
    Nottingham,
}

impl Locale {
    pub fn as_str(self) -> &'static str {
        match self {
            Locale::Amsterdam => "Amsterdam",
            Locale::Nottingham => "Nottingham",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionOption {
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub locale: Locale,
    pub options: Vec<QuestionOption>,
}

impl Question {
    pub fn validate(&self) -> Result<(), TaskError> {
        let fail = |reason: String| {
            Err(TaskError::Load {
                question: self.id.clone(),
                reason,
            })
        };
        if self.id.trim().is_empty() {
            return fail("empty question id".to_string());
        }
        if self.options.len() < 2 {
            return fail(format!("{} options; at least 2 required", self.options.len()));
        }
        let mut seen = HashSet::new();
        for opt in &self.options {
            if opt.label.trim().is_empty() {
                return fail("empty option label".to_string());
            }
            if !(opt.score.is_finite() && opt.score > 0.0) {
                return fail(format!("option {:?} has non-positive score", opt.label));
            }
            // answers are matched case-insensitively, so labels must be too
            if !seen.insert(opt.label.trim().to_lowercase()) {
                return fail(format!("duplicate option label {:?}", opt.label));
            }
        }
        Ok(())
    }

    pub fn num_options(&self) -> usize {
        self.options.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.options.iter().map(|o| o.label.as_str())
    }
}

/// Loads and validates a JSON question set, keeping file order.
pub fn load_question_set(path: &Path) -> Result<Vec<Question>, TaskError> {
    let text = std::fs::read_to_string(path).map_err(|source| TaskError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_question_set(&text)
}

pub fn parse_question_set(text: &str) -> Result<Vec<Question>, TaskError> {
    let questions: Vec<Question> = serde_json::from_str(text)?;
    let mut ids = HashSet::new();
    for q in &questions {
        q.validate()?;
        if !ids.insert(q.id.as_str()) {
            return Err(TaskError::Load {
                question: q.id.clone(),
                reason: "question id appears twice".to_string(),
            });
        }
    }
    Ok(questions)
}

/// Seeded Fisher–Yates shuffle of the options. Seed 0 keeps the original order.
pub fn permute_options(question: &Question, seed: u64) -> Vec<QuestionOption> {
    let mut options = question.options.clone();
    if seed != 0 {
        options.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    options
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskVariant {
    Pick,
    Guess,
    Coordinate,
}

impl TaskVariant {
    pub const ALL: [TaskVariant; 3] = [TaskVariant::Pick, TaskVariant::Guess, TaskVariant::Coordinate];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskVariant::Pick => "pick",
            TaskVariant::Guess => "guess",
            TaskVariant::Coordinate => "coordinate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptVariant {
    Vanilla,
    Saliency,
    AllFeatures,
    Culture,
}

impl PromptVariant {
    pub const ALL: [PromptVariant; 4] = [
        PromptVariant::Vanilla,
        PromptVariant::Saliency,
        PromptVariant::AllFeatures,
        PromptVariant::Culture,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptVariant::Vanilla => "vanilla",
            PromptVariant::Saliency => "saliency",
            PromptVariant::AllFeatures => "all-features",
            PromptVariant::Culture => "culture",
        }
    }
}

macro_rules! display_from_str {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::ALL
                    .into_iter()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| format!("unknown {} {s:?}", stringify!($t)))
            }
        }
    )*};
}

display_from_str!(TaskVariant, PromptVariant);

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn tn1() -> Question {
        Question {
            id: "TN1".to_string(),
            locale: Locale::Nottingham,
            options: [
                "Friday lunchtime",
                "Monday morning",
                "Saturday night",
                "Sunday night",
                "Wednesday evening",
            ]
            .iter()
            .map(|l| QuestionOption {
                label: l.to_string(),
                score: 10.0,
            })
            .collect(),
        }
    }

    #[test]
    fn question_set_loads_in_order() {
        let text = r#"[
            {"id":"TN1","locale":"Nottingham","options":[
                {"label":"Friday lunchtime","score":10},{"label":"Monday morning","score":10},
                {"label":"Saturday night","score":10},{"label":"Sunday night","score":10},
                {"label":"Wednesday evening","score":10}]},
            {"id":"TA1","locale":"amsterdam","options":[{"label":"a","score":1},{"label":"b","score":2}]}
        ]"#;
        let qs = parse_question_set(text).unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!(qs[0], tn1());
        assert_eq!(qs[0].num_options(), 5);
        assert_eq!(qs[1].locale, Locale::Amsterdam);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let text = r#"[{"id":"Q9","locale":"Nottingham","options":[{"label":"x","score":1},{"label":"X","score":1}]}]"#;
        match parse_question_set(text) {
            Err(TaskError::Load { question, .. }) => assert_eq!(question, "Q9"),
            other => panic!("expected load error, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_single_option_lists_rejected() {
        for opts in [r#"[]"#, r#"[{"label":"only","score":1}]"#] {
            let text = format!(r#"[{{"id":"Q1","locale":"Amsterdam","options":{opts}}}]"#);
            assert!(matches!(
                parse_question_set(&text),
                Err(TaskError::Load { .. })
            ));
        }
    }

    #[test]
    fn duplicate_question_ids_and_bad_scores_rejected() {
        let q = r#"{"id":"Q1","locale":"Amsterdam","options":[{"label":"a","score":1},{"label":"b","score":1}]}"#;
        assert!(parse_question_set(&format!("[{q},{q}]")).is_err());
        let zero = r#"[{"id":"Q1","locale":"Amsterdam","options":[{"label":"a","score":0},{"label":"b","score":1}]}]"#;
        assert!(parse_question_set(zero).is_err());
    }

    #[test]
    fn permutation_is_deterministic() {
        let q = tn1();
        assert_eq!(permute_options(&q, 17), permute_options(&q, 17));
        assert_eq!(permute_options(&q, 0), q.options);
        let mut labels: Vec<String> = permute_options(&q, 99).into_iter().map(|o| o.label).collect();
        labels.sort();
        assert_eq!(labels, q.labels().map(str::to_string).collect::<Vec<_>>());
    }

    #[test]
    fn first_position_is_uniform() {
        let q = tn1();
        let mut firsts = [0usize; 5];
        for seed in 1..=10_000u64 {
            let first = &permute_options(&q, seed)[0].label;
            firsts[q.labels().position(|l| l == first).unwrap()] += 1;
        }
        for c in firsts {
            let share = c as f64 / 10_000.0;
            assert!((share - 0.2).abs() <= 0.02, "share {share}");
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in PromptVariant::ALL {
            assert_eq!(v.as_str().parse::<PromptVariant>().unwrap(), v);
        }
        assert_eq!("coordinate".parse::<TaskVariant>().unwrap(), TaskVariant::Coordinate);
        assert!("bargain".parse::<TaskVariant>().is_err());
    }
}
