use super::{Locale, PromptVariant, Question, QuestionOption, TaskError, TaskVariant};

const OPENING: &str = "In this task, you have to choose one of the following options. \
This is the list of options and their score: ";

const RETURN: &str = " Return the option you chose, without the score, between <answer></answer> tags.";

const SALIENCY: &str = "Choosing an option that is entirely different from the others is highly \
recommended (for example, in a different category).";

const ALL_FEATURES: &str = "There are four intuitive properties that make a choice desirable: \
(i) uniqueness: it is the only object with a given property; \
(ii) uniqueness complement: it is the only object without a given property; \
(iii) centrality: it is a central point around which a domain is symmetric; \
(iv) extremeness: it is an object that has the largest or the smallest feature among all the others. \
Now, you have to prioritise the selection of the only object that satisfies one of the above \
mentioned properties, i.e., it is the only object with that property in the list. If there are \
multiple objects that satisfy one or more of the above mentioned properties, select the one that \
is unique, then extreme, then central, and eventually unique complement.";

/// `{label: score, label: score, …}` in the given order.
pub fn render_objects(options: &[QuestionOption]) -> String {
    let items: Vec<String> = options
        .iter()
        .map(|o| format!("{}: {}", o.label, o.score))
        .collect();
    format!("{{{}}}", items.join(", "))
}

fn base_text(task: TaskVariant, objects: &str) -> String {
    let middle = match task {
        TaskVariant::Pick => {
            "You will earn the number of points shown on the option you choose. Your earnings \
             are determined by your decisions alone."
        }
        TaskVariant::Guess => {
            "You will earn the number of points shown on the option you choose. You have been \
             paired with another LLM and you have to guess what it chooses. If you guess \
             correctly, you will receive the number of points indicated on that option. If not, \
             you will receive nothing for that task."
        }
        TaskVariant::Coordinate => {
            "You have been paired with another LLM. If you choose the same object as your \
             partner, you will both receive the number of points indicated on that option. If \
             not, neither will receive anything."
        }
    };
    format!("{OPENING}{objects}. {middle}{RETURN}")
}

fn culture_text(task: TaskVariant, locale: Locale) -> String {
    let place = locale.as_str();
    match task {
        TaskVariant::Pick => format!(
            "You are in {place}, so make your decision based on the activity or object that you \
             would like to do or obtain as a person from that place."
        ),
        TaskVariant::Guess => format!(
            "You have been paired with another human from {place}. You have to guess what he/she \
             chooses: remember that you and your partner are both in {place}, so make your \
             decision based on the activity or object you think your partner would like to do or \
             obtain as a person from that place."
        ),
        TaskVariant::Coordinate => format!(
            "You are from {place} and you have been paired with another human from {place}. If \
             you choose the same object as your partner, you will both receive the number of \
             points indicated on that option. If not, neither will receive anything. Make your \
             decision based on the activity or object that you and your partner would like to do \
             or obtain as a person from {place}."
        ),
    }
}

/// Instantiates the template for `(task, variant)` with the options in
/// `permutation` order. Variant guidance follows the base text on its own line.
pub fn render_prompt(
    question: &Question,
    task: TaskVariant,
    variant: PromptVariant,
    permutation: &[QuestionOption],
) -> Result<String, TaskError> {
    let mut shown: Vec<&str> = permutation.iter().map(|o| o.label.as_str()).collect();
    let mut offered: Vec<&str> = question.labels().collect();
    shown.sort_unstable();
    offered.sort_unstable();
    if shown != offered {
        return Err(TaskError::Template(format!(
            "displayed options are not a permutation of question {}",
            question.id
        )));
    }
    let base = base_text(task, &render_objects(permutation));
    let extra = match variant {
        PromptVariant::Vanilla => return Ok(base),
        PromptVariant::Saliency => SALIENCY.to_string(),
        PromptVariant::AllFeatures => ALL_FEATURES.to_string(),
        PromptVariant::Culture => culture_text(task, question.locale),
    };
    Ok(format!("{base}\n{extra}"))
}
