//! Shared helpers for the `<answer>…</answer>` response convention.

const OPEN: &str = "<answer>";
const CLOSE: &str = "</answer>";

/// Content of the last complete `<answer>…</answer>` span, if any.
///
/// The last closing tag wins, paired with the nearest opening tag before it,
/// so reasoning that quotes the format earlier in the response is ignored.
pub fn last_answer_span(text: &str) -> Option<&str> {
    let close = text.rfind(CLOSE)?;
    let open = text[..close].rfind(OPEN)?;
    Some(&text[open + OPEN.len()..close])
}

/// Wraps `body` in answer tags.
pub fn wrap_answer(body: &str) -> String {
    format!("{OPEN}{body}{CLOSE}")
}
