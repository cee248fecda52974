use super::LlmError;
use crate::textsim::similarity;

/// Minimum similarity for resolving a misspelled selection to a candidate.
pub const SELECTION_SIMILARITY: f64 = 0.8;

/// Contents of the first `[[...]]` span, trimmed. Single brackets inside the
/// span nest; an empty span counts as absent.
pub fn extract_bracketed(reply: &str) -> Option<String> {
    let start = reply.find("[[")? + 2;
    let body = &reply[start..];
    let mut depth = 0usize;
    let mut chars = body.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            ']' if matches!(chars.peek(), Some((_, ']'))) => {
                let inner = body[..i].trim();
                return (!inner.is_empty()).then(|| inner.to_owned());
            }
            _ => {}
        }
    }
    None
}

/// Longest candidate occurring verbatim in `reply`; earlier candidates win ties.
fn longest_contained<'a>(reply: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    let mut best: Option<&str> = None;
    for c in candidates {
        if !c.is_empty() && reply.contains(c) && best.is_none_or(|b| c.chars().count() > b.chars().count()) {
            best = Some(c);
        }
    }
    best
}

pub fn parse_cluster_reply(reply: &str, members: &[&str]) -> Result<String, LlmError> {
    if let Some(name) = extract_bracketed(reply) {
        return Ok(name);
    }
    longest_contained(reply, members.iter().copied())
        .map(str::to_owned)
        .ok_or_else(|| LlmError::UnparseableReply(reply.to_owned()))
}

pub fn parse_verdict(reply: &str) -> Result<bool, LlmError> {
    let scope = extract_bracketed(reply).unwrap_or_else(|| reply.to_owned());
    let mut seen: Option<bool> = None;
    for token in scope.split(|c: char| !c.is_alphanumeric()) {
        let value = match token.to_lowercase().as_str() {
            "1" | "yes" | "true" => true,
            "0" | "no" | "false" => false,
            _ => continue,
        };
        match seen {
            Some(v) if v != value => return Err(LlmError::UnparseableReply(reply.to_owned())),
            _ => seen = Some(value),
        }
    }
    seen.ok_or_else(|| LlmError::UnparseableReply(reply.to_owned()))
}

/// Resolves a navigation reply to one of `names`: bracket span, then exact
/// (case-insensitive) match, then the most similar name at or above
/// [`SELECTION_SIMILARITY`]. Replies without a span fall back to the longest
/// name quoted verbatim.
pub fn parse_selection(reply: &str, names: &[String]) -> Result<String, LlmError> {
    let Some(span) = extract_bracketed(reply) else {
        return longest_contained(reply, names.iter().map(String::as_str))
            .map(str::to_owned)
            .ok_or_else(|| LlmError::NoSelection(reply.to_owned()));
    };
    if let Some(n) = names.iter().find(|n| **n == span) {
        return Ok(n.clone());
    }
    let folded = span.to_lowercase();
    if let Some(n) = names.iter().find(|n| n.to_lowercase() == folded) {
        return Ok(n.clone());
    }
    let mut best: Option<(&String, f64)> = None;
    for n in names {
        let s = similarity(&span, n);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((n, s));
        }
    }
    match best {
        Some((n, s)) if s >= SELECTION_SIMILARITY => Ok(n.clone()),
        _ => Err(LlmError::NoSelection(reply.to_owned())),
    }
}
