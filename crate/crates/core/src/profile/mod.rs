//! Student profiles and the dialogue that elicits them.

mod dialogue;
mod summarize;
mod templates;
mod transcript;
mod validate;

pub use dialogue::{
    ConversationStatus, DialogueEngine, DialogueError, DialogueReply, DialogueState, DialogueTurn,
    Phase, Role, UiFlags,
};
pub use summarize::{summarize_profile, ProfileSummarizer, SummarizeError};
pub use templates::{DialogueTemplates, DIALOGUE_SYSTEM_PROMPT, SUMMARIZATION_SYSTEM_PROMPT};
pub use transcript::{read_transcript, write_transcript, TranscriptError};
pub use validate::{
    parse_academic, validate_input, AcademicParse, Field, Validation, ValidationRules,
};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const PROFILE_SCHEMA_VERSION: u32 = 1;
pub const NOT_APPLICABLE: &str = "not applicable";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcademicYear {
    Freshman,
    Sophomore,
    Junior,
    Senior,
    Graduate,
    NotApplicable,
}

impl AcademicYear {
    pub fn as_str(self) -> &'static str {
        match self {
            AcademicYear::Freshman => "Freshman",
            AcademicYear::Sophomore => "Sophomore",
            AcademicYear::Junior => "Junior",
            AcademicYear::Senior => "Senior",
            AcademicYear::Graduate => "Graduate",
            AcademicYear::NotApplicable => NOT_APPLICABLE,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "Freshman" => AcademicYear::Freshman,
            "Sophomore" => AcademicYear::Sophomore,
            "Junior" => AcademicYear::Junior,
            "Senior" => AcademicYear::Senior,
            "Graduate" => AcademicYear::Graduate,
            NOT_APPLICABLE => AcademicYear::NotApplicable,
            _ => return None,
        })
    }
}

impl fmt::Display for AcademicYear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for AcademicYear {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AcademicYear {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        AcademicYear::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown academic year {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Major {
    Named(String),
    NotApplicable,
}

impl Major {
    pub fn as_str(&self) -> &str {
        match self {
            Major::Named(m) => m,
            Major::NotApplicable => NOT_APPLICABLE,
        }
    }

    pub fn named(&self) -> Option<&str> {
        match self {
            Major::Named(m) => Some(m),
            Major::NotApplicable => None,
        }
    }
}

impl fmt::Display for Major {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Major {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Major {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == NOT_APPLICABLE {
            Major::NotApplicable
        } else {
            Major::Named(s)
        })
    }
}

/// One interest: the user's verbatim wording plus inferred tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterestEntry {
    pub raw_text: String,
    pub domain: String,
    pub category: String,
    pub sub_category: String,
    pub keywords: Vec<String>,
    /// False when tag inference failed; keywords may then be empty.
    pub tags_inferred: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentProfile {
    pub student_id: String,
    pub updated_at: DateTime<Utc>,
    pub year: AcademicYear,
    pub major: Major,
    pub interests: Vec<InterestEntry>,
    pub nl_summary: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("profile is invalid: {0}")]
    Invalid(String),
    #[error("profile document is malformed: {0}")]
    Malformed(String),
    #[error("profile schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
}

impl StudentProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.student_id.trim().is_empty() {
            return Err(ProfileError::Invalid("student_id is empty".into()));
        }
        if let Major::Named(m) = &self.major {
            if m.trim().is_empty() {
                return Err(ProfileError::Invalid("major is empty".into()));
            }
        }
        for (i, entry) in self.interests.iter().enumerate() {
            if entry.raw_text.trim().is_empty() {
                return Err(ProfileError::Invalid(format!("interest {i} has empty raw_text")));
            }
            if entry.tags_inferred && entry.keywords.is_empty() {
                return Err(ProfileError::Invalid(format!(
                    "interest {i} has no keywords but is not flagged as failed inference"
                )));
            }
            let tags = [&entry.domain, &entry.category, &entry.sub_category]
                .into_iter()
                .chain(entry.keywords.iter());
            for tag in tags {
                if tag.trim() != tag {
                    return Err(ProfileError::Invalid(format!(
                        "interest {i} tag {tag:?} has surrounding whitespace"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Profile block embedded in query-generation and adaptation prompts.
    /// The student id is deliberately left out.
    pub fn render_for_prompt(&self) -> String {
        let mut out = format!("Year: {}\nMajor: {}\nInterests:\n", self.year, self.major);
        if self.interests.is_empty() {
            out.push_str("- (none stated)\n");
        }
        for entry in &self.interests {
            out.push_str(&format!(
                "- {} > {} > {} | keywords: {}\n  raw: \"{}\"\n",
                entry.domain,
                entry.category,
                entry.sub_category,
                entry.keywords.join(", "),
                entry.raw_text
            ));
        }
        out.trim_end().to_string()
    }

    /// First keyword of the first interest, used by fallback queries.
    pub fn top_interest_keyword(&self) -> Option<&str> {
        self.interests
            .iter()
            .find_map(|e| e.keywords.first().map(String::as_str))
    }

    /// Fills academic fields that are "not applicable" here from
    /// institutional data. Values obtained through dialogue always win.
    pub fn merge_institutional(&mut self, institutional: &StudentProfile) {
        if self.year == AcademicYear::NotApplicable {
            self.year = institutional.year;
        }
        if self.major == Major::NotApplicable {
            self.major = institutional.major.clone();
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ProfileDocument::from(self);
        serde_json::to_string_pretty(&doc).expect("profile serializes") + "\n"
    }

    pub fn from_json(raw: &str) -> Result<Self, ProfileError> {
        let value: serde_json::Value =
            serde_json::from_str(raw).map_err(|e| ProfileError::Malformed(e.to_string()))?;
        let found = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| ProfileError::Malformed("missing schema_version".into()))?;
        if found != u64::from(PROFILE_SCHEMA_VERSION) {
            return Err(ProfileError::SchemaVersion {
                found: found as u32,
                expected: PROFILE_SCHEMA_VERSION,
            });
        }
        let doc: ProfileDocument =
            serde_json::from_value(value).map_err(|e| ProfileError::Malformed(e.to_string()))?;
        let profile = StudentProfile::from(doc);
        profile.validate()?;
        Ok(profile)
    }
}

/// Versioned wire form with `basic`, `academic` and `interest` sections.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDocument {
    schema_version: u32,
    basic: BasicSection,
    academic: AcademicSection,
    interest: InterestSection,
    nl_summary: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasicSection {
    student_id: String,
    updated_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcademicSection {
    year: AcademicYear,
    major: Major,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterestSection {
    entries: Vec<InterestDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterestDocument {
    raw_text: String,
    structured_tags: StructuredTags,
    tags_inferred: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructuredTags {
    domain: String,
    category: String,
    sub_category: String,
    keywords: Vec<String>,
}

impl From<&StudentProfile> for ProfileDocument {
    fn from(p: &StudentProfile) -> Self {
        ProfileDocument {
            schema_version: PROFILE_SCHEMA_VERSION,
            basic: BasicSection {
                student_id: p.student_id.clone(),
                updated_at: p.updated_at,
            },
            academic: AcademicSection {
                year: p.year,
                major: p.major.clone(),
            },
            interest: InterestSection {
                entries: p
                    .interests
                    .iter()
                    .map(|e| InterestDocument {
                        raw_text: e.raw_text.clone(),
                        structured_tags: StructuredTags {
                            domain: e.domain.clone(),
                            category: e.category.clone(),
                            sub_category: e.sub_category.clone(),
                            keywords: e.keywords.clone(),
                        },
                        tags_inferred: e.tags_inferred,
                    })
                    .collect(),
            },
            nl_summary: p.nl_summary.clone(),
        }
    }
}

impl From<ProfileDocument> for StudentProfile {
    fn from(d: ProfileDocument) -> Self {
        StudentProfile {
            student_id: d.basic.student_id,
            updated_at: d.basic.updated_at,
            year: d.academic.year,
            major: d.academic.major,
            interests: d
                .interest
                .entries
                .into_iter()
                .map(|e| InterestEntry {
                    raw_text: e.raw_text,
                    domain: e.structured_tags.domain,
                    category: e.structured_tags.category,
                    sub_category: e.structured_tags.sub_category,
                    keywords: e.structured_tags.keywords,
                    tags_inferred: e.tags_inferred,
                })
                .collect(),
            nl_summary: d.nl_summary,
        }
    }
}

/// The worked example profile: a sophomore in Computer Science and Technology
/// who plays single-player RPGs.
pub fn table_one_profile() -> StudentProfile {
    use chrono::TimeZone;
    StudentProfile {
        student_id: "student_001".into(),
        updated_at: Utc.with_ymd_and_hms(2025, 8, 24, 0, 0, 0).unwrap(),
        year: AcademicYear::Sophomore,
        major: Major::Named("Computer Science and Technology".into()),
        interests: vec![InterestEntry {
            raw_text: "I like to play games, mainly single-player RPGs with good plots. I'm currently playing 'Baldur's Gate 3,' and I feel the narrative and world-building are amazing. Nothing else to add.".into(),
            domain: "Entertainment".into(),
            category: "Gaming".into(),
            sub_category: "Single-Player RPG".into(),
            keywords: vec![
                "Baldur's Gate 3".into(),
                "Story Narrative".into(),
                "World-Building".into(),
                "Role-Playing".into(),
            ],
            tags_inferred: true,
        }],
        nl_summary: "Year: Sophomore. Major: Computer Science and Technology.".into(),
    }
}
