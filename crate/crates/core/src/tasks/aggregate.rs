use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{PromptVariant, Question, TaskError, TaskVariant};
use crate::game::ChoiceTally;

/// One prompted decision, persisted verbatim so parsing can be re-run offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub agent_id: String,
    pub question_id: String,
    pub task: TaskVariant,
    pub prompt_variant: PromptVariant,
    pub permutation_index: u32,
    pub permutation_seed: u64,
    pub trial_index: u32,
    pub trial_seed: u64,
    /// Option labels in the order they were shown.
    pub displayed_options: Vec<String>,
    pub rendered_prompt: String,
    pub raw_response: String,
    /// `None` when the response named no offered option.
    pub parsed_choice: Option<String>,
    /// Wall-clock time of the response; only recorded for remote agents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionStats {
    pub question_id: String,
    pub tally: ChoiceTally,
    pub ci: f64,
    pub nci: f64,
    pub valid_count: u64,
    pub invalid_count: u64,
}

/// Tallies valid choices over the question's offered options.
///
/// Invalid responses are excluded from the tally and reported separately.
pub fn aggregate_question_stats<'a, I>(
    trials: I,
    question: &Question,
) -> Result<QuestionStats, TaskError>
where
    I: IntoIterator<Item = &'a TrialRecord>,
{
    let labels: Vec<String> = question.labels().map(str::to_string).collect();
    let mut counts = vec![0u64; labels.len()];
    let mut invalid = 0u64;
    for trial in trials {
        if trial.question_id != question.id {
            return Err(TaskError::ForeignTrial {
                expected: question.id.clone(),
                found: trial.question_id.clone(),
            });
        }
        match trial
            .parsed_choice
            .as_ref()
            .and_then(|c| labels.iter().position(|l| l == c))
        {
            Some(i) => counts[i] += 1,
            None => invalid += 1,
        }
    }
    let valid: u64 = counts.iter().sum();
    if valid < 2 {
        return Err(TaskError::TooFewValid {
            question: question.id.clone(),
            valid,
        });
    }
    let tally = ChoiceTally::new(labels, counts)?;
    Ok(QuestionStats {
        question_id: question.id.clone(),
        ci: tally.coordination_index()?,
        nci: tally.normalized_ci()?,
        tally,
        valid_count: valid,
        invalid_count: invalid,
    })
}
