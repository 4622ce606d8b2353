use super::parse::{parse_adaptation_output, ParsedOutput};
use super::prompt::{build_adaptation_prompt, ADAPTATION_SYSTEM_PROMPT};
use super::select::{should_personalize, Selection};
use super::validate::validate_adaptation;
use super::{AdaptationConfig, AdaptationError, AdaptationResult, Decision, Provenance, SkipReason};
use crate::profile::StudentProfile;
use crate::providers::{CompletionRequest, EmbeddingProvider, LlmProvider, PromptPurpose};
use crate::retrieval::{select_top_k, ContentSegment, PersonalKnowledgeBase};

/// One segment through selection, top-k retrieval, generation and
/// validation. A draft that never validates is not returned: the result is
/// then a `validation_failed` skip and the original text is served.
///
/// Errors are configuration problems only (unknown template, embedding
/// dimension disagreeing with the KB); provider failures become
/// `provider_unavailable` skips.
pub fn personalize_segment(
    profile: &StudentProfile,
    segment: &ContentSegment,
    kb: &PersonalKnowledgeBase,
    llm: &dyn LlmProvider,
    embedding: &dyn EmbeddingProvider,
    cfg: &AdaptationConfig,
) -> Result<AdaptationResult, AdaptationError> {
    let mut provenance = Provenance {
        prompt_version: cfg.prompt_version.clone(),
        llm_provider: llm.id().to_string(),
        embedding_provider: embedding.id().to_string(),
        ..Provenance::default()
    };
    let skip = |reason, provenance| AdaptationResult::skip(&profile.student_id, &segment.segment_id, reason, provenance);

    if let Selection::Skip(reason) = should_personalize(segment, cfg) {
        return Ok(skip(reason, provenance));
    }

    let query = match embedding.embed(&segment.text).and_then(|v| {
        v.normalized()
            .map_err(|e| crate::providers::ProviderError::MalformedResponse(e.to_string()))
    }) {
        Ok(v) => v,
        Err(e) => {
            tracing::error!(segment = %segment.segment_id, error = %e, "segment embedding failed");
            provenance.error = Some(e.to_string());
            return Ok(skip(SkipReason::ProviderUnavailable, provenance));
        }
    };
    let top = select_top_k(kb, query.values(), cfg.k).map_err(|e| AdaptationError::Config(e.to_string()))?;
    provenance.chunk_ids = top.iter().map(|c| c.chunk_id.clone()).collect();
    provenance.similarities = top.iter().map(|c| c.similarity).collect();

    let prompt = build_adaptation_prompt(profile, &top, segment, &cfg.prompt_version)?;
    let request = CompletionRequest::new(PromptPurpose::Adaptation, ADAPTATION_SYSTEM_PROMPT, prompt);

    let mut last_report = None;
    for attempt in 0..=cfg.max_retries {
        provenance.attempts = attempt + 1;
        let completion = match llm.complete(&request) {
            Ok(c) => c,
            Err(e) => {
                tracing::error!(segment = %segment.segment_id, error = %e, "adaptation call failed");
                provenance.error = Some(e.to_string());
                return Ok(skip(SkipReason::ProviderUnavailable, provenance));
            }
        };
        if completion.safety_flag {
            tracing::warn!(segment = %segment.segment_id, attempt, "adaptation output safety-blocked");
            continue;
        }
        match parse_adaptation_output(&completion.text) {
            Ok(ParsedOutput::ModelNone) => return Ok(skip(SkipReason::ModelNone, provenance)),
            Ok(ParsedOutput::Adapted(text)) => {
                let report = validate_adaptation(segment, &text, cfg);
                if report.passed {
                    return Ok(AdaptationResult {
                        profile_id: profile.student_id.clone(),
                        segment_id: segment.segment_id.clone(),
                        decision: Decision::Adapted,
                        adapted_text: Some(text),
                        validation: Some(report),
                        provenance,
                    });
                }
                tracing::warn!(segment = %segment.segment_id, attempt, failures = ?report.failures, "adaptation failed validation");
                last_report = Some(report);
            }
            Err(e) => {
                tracing::warn!(segment = %segment.segment_id, attempt, error = %e, "unusable adaptation output");
            }
        }
    }
    let mut result = skip(SkipReason::ValidationFailed, provenance);
    result.validation = last_report;
    Ok(result)
}
