//! Segment selection, prompt assembly, output parsing and validation for
//! personalized content generation.

mod neutrality;
mod parse;
mod personalize;
mod prompt;
mod select;
mod validate;

pub use neutrality::{check_neutrality, NeutralityViolation, DEFAULT_NEUTRALITY_PHRASES};
pub use parse::{parse_adaptation_output, ParsedOutput};
pub use personalize::personalize_segment;
pub use prompt::{build_adaptation_prompt, ADAPTATION_SYSTEM_PROMPT, NO_RETRIEVED_DOCUMENTS};
pub use select::{should_personalize, Selection};
pub use validate::{extract_key_terms, validate_adaptation, ValidationReport};

use crate::providers::ProviderError;
use crate::retrieval::ContentSegment;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const DEFAULT_PROMPT_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptationConfig {
    pub prompt_version: String,
    pub k: usize,
    /// Segments under this many words are brief.
    pub min_words: usize,
    pub min_length_ratio: f64,
    pub max_length_ratio: f64,
    pub retention_threshold: f64,
    /// Frequency-ranked content words taken as key terms.
    pub key_terms_top: usize,
    pub max_retries: u32,
    pub neutrality_phrases: Vec<String>,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        Self {
            prompt_version: DEFAULT_PROMPT_VERSION.into(),
            k: 5,
            min_words: 40,
            min_length_ratio: 0.8,
            max_length_ratio: 1.6,
            retention_threshold: 0.7,
            key_terms_top: 10,
            max_retries: 1,
            neutrality_phrases: DEFAULT_NEUTRALITY_PHRASES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl AdaptationConfig {
    pub fn validate(&self) -> Result<(), AdaptationError> {
        if self.k == 0 {
            return Err(AdaptationError::Config("k must be at least 1".into()));
        }
        if !(self.min_length_ratio > 0.0 && self.min_length_ratio <= self.max_length_ratio) {
            return Err(AdaptationError::Config("length band must satisfy 0 < min <= max".into()));
        }
        if !(0.0..=1.0).contains(&self.retention_threshold) {
            return Err(AdaptationError::Config("retention threshold must lie in [0, 1]".into()));
        }
        prompt::template(&self.prompt_version)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Brief,
    Introductory,
    Concluding,
    Elementary,
    ModelNone,
    ValidationFailed,
    ProviderUnavailable,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Brief => "brief",
            SkipReason::Introductory => "introductory",
            SkipReason::Concluding => "concluding",
            SkipReason::Elementary => "elementary",
            SkipReason::ModelNone => "model_none",
            SkipReason::ValidationFailed => "validation_failed",
            SkipReason::ProviderUnavailable => "provider_unavailable",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AdaptationError {
    #[error("unknown prompt template version {0:?}")]
    UnknownTemplate(String),
    #[error("invalid adaptation configuration: {0}")]
    Config(String),
    #[error("malformed generation: {0}")]
    MalformedGeneration(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// What went into a generation, recorded with every result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub prompt_version: String,
    pub llm_provider: String,
    pub embedding_provider: String,
    pub chunk_ids: Vec<String>,
    pub similarities: Vec<f64>,
    /// LLM calls made, including retries.
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    Skip { reason: SkipReason },
    Adapted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationResult {
    pub profile_id: String,
    pub segment_id: String,
    #[serde(flatten)]
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adapted_text: Option<String>,
    /// Report for the last draft checked, kept on skips too.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    pub provenance: Provenance,
}

impl AdaptationResult {
    pub fn skip(profile_id: &str, segment_id: &str, reason: SkipReason, provenance: Provenance) -> Self {
        Self {
            profile_id: profile_id.into(),
            segment_id: segment_id.into(),
            decision: Decision::Skip { reason },
            adapted_text: None,
            validation: None,
            provenance,
        }
    }

    pub fn is_adapted(&self) -> bool {
        matches!(self.decision, Decision::Adapted)
    }

    pub fn skip_reason(&self) -> Option<SkipReason> {
        match self.decision {
            Decision::Skip { reason } => Some(reason),
            Decision::Adapted => None,
        }
    }

    /// Text to show the student: the adaptation only when it is marked
    /// adapted and carries a passing report, otherwise the original.
    pub fn served_text<'a>(&'a self, original: &'a ContentSegment) -> &'a str {
        match (&self.decision, &self.adapted_text, &self.validation) {
            (Decision::Adapted, Some(text), Some(report)) if report.passed && self.segment_id == original.segment_id => text,
            _ => &original.text,
        }
    }
}
