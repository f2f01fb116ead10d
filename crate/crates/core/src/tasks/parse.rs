use super::Question;
use crate::answer::last_answer_span;

/// Maps a raw response to one of the question's labels, or `None` when the
/// response names no offered option.
///
/// The last answer span is trimmed, unquoted, and stripped of a trailing
/// `: <score>` before a case-insensitive label match.
pub fn parse_answer(raw: &str, question: &Question) -> Option<String> {
    let span = last_answer_span(raw)?.trim();
    let span = strip_quotes(span);
    let candidate = match span.rsplit_once(':') {
        Some((head, tail)) if tail.trim().parse::<f64>().is_ok() => head.trim_end(),
        _ => span,
    };
    let candidate = strip_quotes(candidate.trim());
    question
        .options
        .iter()
        .find(|o| o.label.trim().to_lowercase() == candidate.to_lowercase())
        .map(|o| o.label.clone())
}

fn strip_quotes(s: &str) -> &str {
    for q in ['"', '\''] {
        if let Some(inner) = s.strip_prefix(q).and_then(|x| x.strip_suffix(q)) {
            return inner.trim();
        }
    }
    s
}
