use super::AdaptationError;
use crate::profile::StudentProfile;
use crate::retrieval::{ContentSegment, RetrievedChunk};

const TEMPLATE_V1: &str = include_str!("../../resources/prompts/adaptation_v1.txt");

pub const ADAPTATION_SYSTEM_PROMPT: &str =
    "You adapt standardized lecture content for one student. Follow the user instructions exactly.";
pub const NO_RETRIEVED_DOCUMENTS: &str = "(no retrieved documents)";

pub(super) fn template(version: &str) -> Result<&'static str, AdaptationError> {
    match version {
        "v1" => Ok(TEMPLATE_V1),
        other => Err(AdaptationError::UnknownTemplate(other.to_string())),
    }
}

/// Single-pass `{name}` substitution, so values are never rescanned.
fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            values.iter().find(|(n, _)| *n == name).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn escape_script_tags(text: &str) -> String {
    text.replace("<script>", "&lt;script&gt;").replace("</script>", "&lt;/script&gt;")
}

pub(crate) fn render_chunks(chunks: &[RetrievedChunk]) -> String {
    if chunks.is_empty() {
        return NO_RETRIEVED_DOCUMENTS.to_string();
    }
    chunks
        .iter()
        .enumerate()
        .map(|(i, c)| format!("[{}] ({}, {:.4})\n{}", i + 1, c.chunk_id, c.similarity, escape_script_tags(c.text.trim())))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Renders the versioned generation prompt. The segment text is the only
/// thing between the `<script>` tags; stray script tags elsewhere are escaped.
pub fn build_adaptation_prompt(
    profile: &StudentProfile,
    chunks: &[RetrievedChunk],
    segment: &ContentSegment,
    template_version: &str,
) -> Result<String, AdaptationError> {
    let template = template(template_version)?;
    let profile_block = escape_script_tags(&profile.render_for_prompt());
    let docs = render_chunks(chunks);
    let content = escape_script_tags(&segment.text);
    Ok(fill(
        template,
        &[
            ("student_profile", &profile_block),
            ("retrieved_documents", &docs),
            ("standardized_content", &content),
        ],
    ))
}
