use super::segment::ContentSegment;
use crate::profile::StudentProfile;
use crate::providers::{CompletionRequest, LlmProvider, PromptPurpose, ProviderError};
use crate::text;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

pub const MAX_QUERY_CHARS: usize = 200;
pub const MIN_QUERIES: usize = 3;
pub const MAX_QUERIES: usize = 5;

const QUERY_TEMPLATE: &str = include_str!("../../resources/prompts/query_generation.txt");
pub const QUERY_SYSTEM_PROMPT: &str =
    "You write web search queries that find extended learning material for one student.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub query_id: String,
    pub text: String,
    pub source_segment_id: String,
    pub profile_id: String,
    /// 1-based generation order.
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryOrigin {
    Generated,
    Fallback,
}

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("query generation precondition failed: {0}")]
    Precondition(String),
    #[error("model produced {count} usable queries: {reason}")]
    MalformedGeneration { count: usize, reason: String },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

fn check_preconditions(profile: &StudentProfile, segment: &ContentSegment) -> Result<(), QueryError> {
    if profile.major.named().is_none() && profile.interests.is_empty() {
        return Err(QueryError::Precondition(
            "profile needs a major or at least one interest".into(),
        ));
    }
    if segment.text.trim().is_empty() {
        return Err(QueryError::Precondition("segment text is empty".into()));
    }
    Ok(())
}

pub fn render_query_prompt(profile: &StudentProfile, segment: &ContentSegment) -> String {
    QUERY_TEMPLATE
        .replace("{student_profile}", &profile.render_for_prompt())
        .replace("{segment_title}", &segment.topic())
        .replace("{course_content}", &segment.text)
}

/// Query lines from raw model output: list markers and wrapping quotes are
/// stripped, blank lines skipped, duplicates removed case-insensitively.
pub fn parse_query_lines(raw: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for line in raw.lines() {
        let mut q = line.trim();
        let digits = q.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 && q[digits..].starts_with(['.', ')', ':']) {
            q = &q[digits + 1..];
        } else if let Some(rest) = q.strip_prefix(['-', '*', '\u{2022}']) {
            q = rest;
        }
        let q = q.trim().trim_matches(['"', '\'', '`']).trim();
        if q.is_empty() {
            continue;
        }
        let squashed = text::squash_whitespace(q);
        if seen.insert(squashed.to_lowercase()) {
            out.push(squashed);
        }
    }
    out
}

fn to_queries(texts: Vec<String>, profile: &StudentProfile, segment: &ContentSegment) -> Vec<SearchQuery> {
    texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| SearchQuery {
            query_id: format!("{}:q{}", segment.segment_id, i + 1),
            text,
            source_segment_id: segment.segment_id.clone(),
            profile_id: profile.student_id.clone(),
            rank: i + 1,
        })
        .collect()
}

/// One generation attempt. Fails with `MalformedGeneration` unless the model
/// yields 3 to 5 distinct, on-topic queries of at most 200 characters.
pub fn generate_queries(
    profile: &StudentProfile,
    segment: &ContentSegment,
    llm: &dyn LlmProvider,
) -> Result<Vec<SearchQuery>, QueryError> {
    check_preconditions(profile, segment)?;
    let request = CompletionRequest::new(
        PromptPurpose::QueryGeneration,
        QUERY_SYSTEM_PROMPT,
        render_query_prompt(profile, segment),
    );
    let out = llm.complete(&request)?;
    if out.safety_flag {
        return Err(QueryError::MalformedGeneration {
            count: 0,
            reason: "response was safety-blocked".into(),
        });
    }
    let lines = parse_query_lines(&out.text);
    let count = lines.len();
    if !(MIN_QUERIES..=MAX_QUERIES).contains(&count) {
        return Err(QueryError::MalformedGeneration {
            count,
            reason: format!("expected {MIN_QUERIES}-{MAX_QUERIES} distinct queries"),
        });
    }
    if let Some(long) = lines.iter().find(|q| q.chars().count() > MAX_QUERY_CHARS) {
        return Err(QueryError::MalformedGeneration {
            count,
            reason: format!("query exceeds {MAX_QUERY_CHARS} characters: {long:.40}..."),
        });
    }
    let topic: HashSet<String> = text::content_tokens(&format!("{} {}", segment.title, segment.text))
        .iter()
        .map(|t| text::stem(t))
        .collect();
    if let Some(off) = lines
        .iter()
        .find(|q| !text::content_tokens(q).iter().any(|t| topic.contains(&text::stem(t))))
    {
        return Err(QueryError::MalformedGeneration {
            count,
            reason: format!("query does not reference the segment: {off}"),
        });
    }
    Ok(to_queries(lines, profile, segment))
}

fn clip(s: String) -> String {
    if s.chars().count() <= MAX_QUERY_CHARS {
        s
    } else {
        s.chars().take(MAX_QUERY_CHARS).collect::<String>().trim_end().to_string()
    }
}

/// The three template queries used when generation fails twice.
pub fn fallback_queries(profile: &StudentProfile, segment: &ContentSegment) -> Vec<SearchQuery> {
    let title = segment.topic();
    let first = match profile.major.named() {
        Some(major) => format!("{major} {title}"),
        None => format!("{title} fundamentals"),
    };
    let second = match profile.top_interest_keyword() {
        Some(kw) => format!("{kw} {title}"),
        None => format!("{title} real-world applications"),
    };
    let third = format!("{title} examples");
    to_queries(vec![clip(first), clip(second), clip(third)], profile, segment)
}

/// Generate, retry once on a malformed answer, then fall back to templates.
/// Provider failures are not masked.
pub fn generate_queries_with_fallback(
    profile: &StudentProfile,
    segment: &ContentSegment,
    llm: &dyn LlmProvider,
) -> Result<(Vec<SearchQuery>, QueryOrigin), QueryError> {
    for attempt in 0..2 {
        match generate_queries(profile, segment, llm) {
            Ok(q) => return Ok((q, QueryOrigin::Generated)),
            Err(QueryError::MalformedGeneration { count, reason }) => {
                tracing::warn!(segment = %segment.segment_id, attempt, count, %reason, "malformed query generation");
            }
            Err(e) => return Err(e),
        }
    }
    Ok((fallback_queries(profile, segment), QueryOrigin::Fallback))
}
