//! Transcript to [`StudentProfile`].
//!
//! Only user turns are read. Academic values follow last-mention-wins, and
//! turns the dialogue rejected are dropped as noise. Structured interest tags
//! come from one LLM call per interest.

use super::dialogue::{interest_label, DialogueTurn, Phase, Role};
use super::templates::{DialogueTemplates, SUMMARIZATION_SYSTEM_PROMPT};
use super::validate::{self, Field, Validation, ValidationRules};
use super::{AcademicYear, InterestEntry, Major, StudentProfile, NOT_APPLICABLE};
use crate::providers::{CompletionRequest, LlmProvider, PromptPurpose, ProviderError};
use serde::Deserialize;
use thiserror::Error;

pub const UNCATEGORIZED: &str = "Uncategorized";

#[derive(Debug, Error)]
pub enum SummarizeError {
    #[error("student_id must be non-empty")]
    EmptyStudentId,
    #[error("profile is incomplete; missing: {}", .missing.join(", "))]
    IncompleteProfile { missing: Vec<&'static str> },
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Default)]
pub struct ProfileSummarizer {
    pub rules: ValidationRules,
    pub templates: DialogueTemplates,
}

pub fn summarize_profile(
    student_id: &str,
    history: &[DialogueTurn],
    llm: &dyn LlmProvider,
) -> Result<StudentProfile, SummarizeError> {
    ProfileSummarizer::default().summarize(student_id, history, llm)
}

#[derive(Deserialize)]
struct TagReply {
    domain: String,
    category: String,
    sub_category: String,
    #[serde(default)]
    keywords: Vec<String>,
}

/// Extracted, not yet tagged.
#[derive(Debug, Default)]
struct Extraction {
    year: Option<AcademicYear>,
    major: Option<Major>,
    disclaimed: bool,
    interests: Vec<Vec<String>>,
}

impl ProfileSummarizer {
    fn extract(&self, history: &[DialogueTurn]) -> Extraction {
        let mut ex = Extraction::default();
        let mut current: Option<usize> = None;
        for turn in history.iter().filter(|t| t.role == Role::User && !t.rejected) {
            let text = turn.text.trim();
            if text.is_empty() {
                continue;
            }
            match turn.phase {
                Some(Phase::AwaitAcademic | Phase::AwaitAcademicPartial | Phase::Opening) => {
                    self.apply_academic(&mut ex, text);
                }
                Some(Phase::InterestInquiry) => {
                    if validate::is_finish_signal(text)
                        || !matches!(self.rules.validate(Field::Interest, text), Validation::Valid(_))
                    {
                        continue;
                    }
                    ex.interests.push(vec![text.to_string()]);
                    current = Some(ex.interests.len() - 1);
                }
                Some(Phase::InterestDeepDive) => match current {
                    Some(i) => ex.interests[i].push(text.to_string()),
                    None => {
                        ex.interests.push(vec![text.to_string()]);
                        current = Some(ex.interests.len() - 1);
                    }
                },
                Some(Phase::ExitOffer) => {
                    if validate::is_finish_signal(text) {
                        if let Some(i) = current {
                            ex.interests[i].push(text.to_string());
                        }
                        current = None;
                    } else if validate::is_confirmation(text) && validate::words_after_first(text) <= 2 {
                        current = None;
                    } else if matches!(self.rules.validate(Field::Interest, text), Validation::Valid(_)) {
                        ex.interests.push(vec![text.to_string()]);
                        current = Some(ex.interests.len() - 1);
                    }
                }
                Some(Phase::SummaryConfirm) => {
                    if !validate::is_confirmation(text) {
                        self.apply_corrections(&mut ex, text);
                    }
                }
                Some(Phase::SafetyPending | Phase::Completed | Phase::Aborted) => {}
                None => self.apply_unannotated(&mut ex, &mut current, text),
            }
        }
        if ex.disclaimed {
            ex.year.get_or_insert(AcademicYear::NotApplicable);
            ex.major.get_or_insert(Major::NotApplicable);
        }
        ex
    }

    fn apply_academic(&self, ex: &mut Extraction, text: &str) {
        let parse = self.rules.parse_academic(text);
        match parse.year {
            Some(Validation::Valid(y)) => ex.year = AcademicYear::parse(&y),
            Some(Validation::NotApplicable) => {
                ex.year = Some(AcademicYear::NotApplicable);
                ex.disclaimed = true;
            }
            _ => {}
        }
        match parse.major {
            Some(Validation::Valid(m)) => ex.major = Some(Major::Named(m)),
            Some(Validation::NotApplicable) => {
                ex.major = Some(Major::NotApplicable);
                ex.disclaimed = true;
            }
            _ => {}
        }
    }

    fn apply_corrections(&self, ex: &mut Extraction, text: &str) {
        let parse = self.rules.parse_academic(text);
        if let Some(Validation::Valid(y)) = parse.year {
            ex.year = AcademicYear::parse(&y);
        }
        if let Some(Validation::Valid(m)) = parse.major {
            if !validate::is_negative(&m) {
                ex.major = Some(Major::Named(m));
            }
        }
    }

    /// Transcripts without phase annotations: academic statements are
    /// recognised by content, everything else valid is interest text.
    fn apply_unannotated(&self, ex: &mut Extraction, current: &mut Option<usize>, text: &str) {
        let academic_open = ex.year.is_none() || ex.major.is_none();
        let parse = self.rules.parse_academic(text);
        let academic_hit = matches!(parse.year, Some(Validation::Valid(_) | Validation::NotApplicable))
            || (academic_open && matches!(parse.major, Some(Validation::NotApplicable)));
        if academic_open && (academic_hit || ex.year.is_some() && matches!(parse.major, Some(Validation::Valid(_)))) {
            self.apply_academic(ex, text);
            return;
        }
        if academic_hit {
            self.apply_corrections(ex, text);
            return;
        }
        if validate::is_finish_signal(text) {
            if let Some(i) = *current {
                ex.interests[i].push(text.to_string());
            }
            *current = None;
            return;
        }
        if validate::is_confirmation(text) && validate::words_after_first(text) <= 2 {
            return;
        }
        if matches!(self.rules.validate(Field::Interest, text), Validation::Valid(_)) {
            match *current {
                Some(i) => ex.interests[i].push(text.to_string()),
                None => {
                    ex.interests.push(vec![text.to_string()]);
                    *current = Some(ex.interests.len() - 1);
                }
            }
        }
    }

    fn infer_tags(
        &self,
        llm: &dyn LlmProvider,
        history_block: &str,
        raw: &str,
    ) -> Result<InterestEntry, ProviderError> {
        let system = SUMMARIZATION_SYSTEM_PROMPT.replace("{conversation_history}", history_block);
        let user = format!("INTEREST RAW TEXT:\n{raw}\n");
        let out = llm.complete(&CompletionRequest::new(PromptPurpose::ProfileTags, system, user))?;
        let parsed = (!out.safety_flag).then(|| parse_tags(&out.text)).flatten();
        Ok(match parsed {
            Some(tags) => InterestEntry {
                raw_text: raw.to_string(),
                domain: tags.domain,
                category: tags.category,
                sub_category: tags.sub_category,
                keywords: tags.keywords,
                tags_inferred: true,
            },
            None => {
                tracing::warn!("interest tag inference failed; storing uncategorized entry");
                InterestEntry {
                    raw_text: raw.to_string(),
                    domain: UNCATEGORIZED.into(),
                    category: UNCATEGORIZED.into(),
                    sub_category: UNCATEGORIZED.into(),
                    keywords: Vec::new(),
                    tags_inferred: false,
                }
            }
        })
    }

    pub fn summarize(
        &self,
        student_id: &str,
        history: &[DialogueTurn],
        llm: &dyn LlmProvider,
    ) -> Result<StudentProfile, SummarizeError> {
        if student_id.trim().is_empty() {
            return Err(SummarizeError::EmptyStudentId);
        }
        let ex = self.extract(history);
        let mut missing = Vec::new();
        if ex.year.is_none() {
            missing.push("year");
        }
        if ex.major.is_none() {
            missing.push("major");
        }
        let (Some(year), Some(major)) = (ex.year, ex.major.clone()) else {
            return Err(SummarizeError::IncompleteProfile { missing });
        };
        let history_block = history
            .iter()
            .filter(|t| t.role == Role::User && !t.rejected)
            .map(|t| format!("role: user\ncontent: {}", t.text.trim()))
            .collect::<Vec<_>>()
            .join("\n\n");
        let mut interests = Vec::with_capacity(ex.interests.len());
        for group in &ex.interests {
            interests.push(self.infer_tags(llm, &history_block, &group.join(" "))?);
        }
        let labels: Vec<String> = ex.interests.iter().map(|g| interest_label(&g[0])).collect();
        let nl_summary = self.templates.summary(
            year.as_str(),
            major.named().unwrap_or(NOT_APPLICABLE),
            &labels,
        );
        let updated_at = history
            .last()
            .map(|t| t.timestamp)
            .expect("history has at least one user turn here");
        let profile = StudentProfile {
            student_id: student_id.to_string(),
            updated_at,
            year,
            major,
            interests,
            nl_summary,
        };
        Ok(profile)
    }
}

fn clean_tag(s: &str) -> String {
    s.trim().to_string()
}

fn parse_tags(text: &str) -> Option<TagReply> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    let mut tags: TagReply = serde_json::from_str(text.get(start..=end)?).ok()?;
    tags.domain = clean_tag(&tags.domain);
    tags.category = clean_tag(&tags.category);
    tags.sub_category = clean_tag(&tags.sub_category);
    tags.keywords = tags
        .keywords
        .iter()
        .map(|k| clean_tag(k))
        .filter(|k| !k.is_empty())
        .collect();
    let complete = !(tags.domain.is_empty()
        || tags.category.is_empty()
        || tags.sub_category.is_empty()
        || tags.keywords.is_empty());
    complete.then_some(tags)
}
