use super::AdaptationError;

pub const NONE_SENTINEL: &str = "[None]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedOutput {
    /// The model declined with the sentinel.
    ModelNone,
    Adapted(String),
}

fn strip_think(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(open) = rest.find("<think>") {
        out.push_str(&rest[..open]);
        match rest[open..].find("</think>") {
            Some(close) => rest = &rest[open + close + "</think>".len()..],
            None => {
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn strip_fence(text: &str) -> &str {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix("```") {
        if let Some(body) = inner.strip_suffix("```") {
            // Drop an info string such as ```text.
            return match body.find('\n') {
                Some(nl) if !body[..nl].trim().contains(' ') => &body[nl + 1..],
                _ => body,
            };
        }
    }
    t
}

fn strip_script(text: &str) -> &str {
    let t = text.trim();
    t.strip_prefix("<script>")
        .and_then(|s| s.strip_suffix("</script>"))
        .unwrap_or(t)
}

/// Exactly `[None]` after trimming is a skip. Anything else is the adapted
/// text with reasoning blocks, a code fence and a script wrapper removed.
pub fn parse_adaptation_output(raw: &str) -> Result<ParsedOutput, AdaptationError> {
    if raw.trim().is_empty() {
        return Err(AdaptationError::MalformedGeneration("empty model output".into()));
    }
    if raw.trim() == NONE_SENTINEL {
        return Ok(ParsedOutput::ModelNone);
    }
    let unthought = strip_think(raw);
    let body = strip_script(strip_fence(&unthought)).trim();
    if body.is_empty() {
        return Err(AdaptationError::MalformedGeneration("no content after removing wrappers".into()));
    }
    if body == NONE_SENTINEL {
        return Ok(ParsedOutput::ModelNone);
    }
    Ok(ParsedOutput::Adapted(body.to_string()))
}
