//! Host-enforced elicitation dialogue.
//!
//! The engine owns every transition, the strike counter and the UI flags.
//! The LLM only supplies the wording of each reply (and, through its safety
//! channel, the signal that moves the session into the care path).

use super::templates::{DialogueTemplates, PLAUSIBILITY_SYSTEM_PROMPT};
use super::validate::{self, AcademicParse, Field, Validation, ValidationRules};
use super::{AcademicYear, Major};
use crate::clock::{Clock, SystemClock};
use crate::providers::{CompletionRequest, LlmProvider, PromptPurpose, ProviderError};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

pub const MAX_STRIKES: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Opening,
    AwaitAcademic,
    AwaitAcademicPartial,
    InterestInquiry,
    InterestDeepDive,
    ExitOffer,
    SummaryConfirm,
    Completed,
    Aborted,
    SafetyPending,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Completed | Phase::Aborted)
    }

    fn is_academic(self) -> bool {
        matches!(self, Phase::AwaitAcademic | Phase::AwaitAcademicPartial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConversationStatus {
    InProgress,
    SummaryAndConfirm,
    CompletedAndGenerateProfile,
    AbortedWithoutProfile,
}

impl ConversationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ConversationStatus::InProgress => "in_progress",
            ConversationStatus::SummaryAndConfirm => "summary_and_confirm",
            ConversationStatus::CompletedAndGenerateProfile => "completed_and_generate_profile",
            ConversationStatus::AbortedWithoutProfile => "aborted_without_profile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub role: Role,
    pub text: String,
    pub timestamp: DateTime<Utc>,
    /// Phase the turn was produced in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
    /// User input rejected by validation (joke, nonsense, empty).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rejected: bool,
}

impl DialogueTurn {
    pub fn user(text: impl Into<String>, timestamp: DateTime<Utc>) -> Self {
        Self {
            role: Role::User,
            text: text.into(),
            timestamp,
            phase: None,
            rejected: false,
        }
    }

    pub fn model(text: impl Into<String>, timestamp: DateTime<Utc>) -> Self {
        Self {
            role: Role::Model,
            ..Self::user(text, timestamp)
        }
    }
}

/// Values accepted so far.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collected {
    pub year: Option<AcademicYear>,
    pub major: Option<Major>,
    /// Finished interests, each as the user messages that described it.
    pub interests: Vec<Vec<String>>,
    /// The interest currently being discussed.
    pub pending: Vec<String>,
}

impl Collected {
    fn academic_complete(&self) -> bool {
        self.year.is_some() && self.major.is_some()
    }

    fn flush_pending(&mut self) {
        if !self.pending.is_empty() {
            self.interests.push(std::mem::take(&mut self.pending));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueState {
    pub session_id: String,
    pub agent_name: String,
    pub phase: Phase,
    pub strikes: u8,
    pub history: Vec<DialogueTurn>,
    pub show_exit_button: bool,
    pub conversation_status: ConversationStatus,
    pub collected: Collected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiFlags {
    pub show_exit_button: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueReply {
    pub state: DialogueState,
    pub reply: String,
    pub ui: Option<UiFlags>,
}

#[derive(Debug, Error)]
pub enum DialogueError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("session is in terminal phase {0:?}")]
    Terminal(Phase),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Short label for an interest, taken from its first message.
pub(crate) fn interest_label(first_message: &str) -> String {
    const LEAD_INS: &[&str] = &[
        "i really like to ", "i really love to ", "i really love ", "i really like ",
        "i like to ", "i love to ", "i like ", "i love ", "i enjoy ", "i'm into ", "im into ",
        "i am into ", "i'm really into ", "my hobby is ", "my hobbies are ", "i'm a fan of ",
        "mostly ", "mainly ", "probably ",
    ];
    let clause = first_message
        .split(['.', ',', ';', '!', '?', '\n'])
        .map(str::trim)
        .find(|c| !c.is_empty())
        .unwrap_or_default();
    let mut rest = clause;
    loop {
        let lower = rest.to_ascii_lowercase();
        match LEAD_INS.iter().find(|p| lower.starts_with(*p)) {
            Some(p) => rest = rest[p.len()..].trim_start(),
            None => break,
        }
    }
    let words: Vec<&str> = rest.split_whitespace().take(6).collect();
    if words.is_empty() {
        "that".into()
    } else {
        words.join(" ")
    }
}

/// What the host decided for one turn before any wording is produced.
enum Move {
    /// Ask the model to word a reply for `directive` about `subject`.
    Worded { directive: &'static str, subject: String },
    /// Model wording followed by a fixed suffix.
    WordedThen { directive: &'static str, subject: String, suffix: String },
    Fixed(String),
}

pub struct DialogueEngine {
    templates: DialogueTemplates,
    rules: ValidationRules,
    clock: Arc<dyn Clock>,
    /// Ask the model whether rule-accepted values are plausible.
    pub plausibility_check: bool,
}

impl Default for DialogueEngine {
    fn default() -> Self {
        Self::new(DialogueTemplates::default(), ValidationRules::default(), Arc::new(SystemClock))
    }
}

impl DialogueEngine {
    pub fn new(templates: DialogueTemplates, rules: ValidationRules, clock: Arc<dyn Clock>) -> Self {
        Self {
            templates,
            rules,
            clock,
            plausibility_check: true,
        }
    }

    pub fn templates(&self) -> &DialogueTemplates {
        &self.templates
    }

    pub fn rules(&self) -> &ValidationRules {
        &self.rules
    }

    pub fn start_session(&self, agent_name: &str) -> Result<(DialogueState, String), DialogueError> {
        self.start_session_with_id(uuid::Uuid::new_v4().to_string(), agent_name)
    }

    pub fn start_session_with_id(
        &self,
        session_id: String,
        agent_name: &str,
    ) -> Result<(DialogueState, String), DialogueError> {
        let agent_name = agent_name.trim();
        if agent_name.is_empty() {
            return Err(DialogueError::InvalidArgument("agent_name must be non-empty".into()));
        }
        if session_id.trim().is_empty() {
            return Err(DialogueError::InvalidArgument("session_id must be non-empty".into()));
        }
        let reply = self.templates.opening(agent_name);
        let mut opening = DialogueTurn::model(reply.clone(), self.clock.now());
        opening.phase = Some(Phase::Opening);
        let state = DialogueState {
            session_id,
            agent_name: agent_name.to_string(),
            phase: Phase::AwaitAcademic,
            strikes: 0,
            history: vec![opening],
            show_exit_button: false,
            conversation_status: ConversationStatus::InProgress,
            collected: Collected::default(),
        };
        Ok((state, reply))
    }

    /// Plausibility verdict for a rule-accepted value. `None` means the
    /// provider raised its safety flag.
    fn plausible(
        &self,
        llm: &dyn LlmProvider,
        field: Field,
        value: &str,
    ) -> Result<Option<bool>, ProviderError> {
        if !self.plausibility_check {
            return Ok(Some(true));
        }
        let user = format!("FIELD: {}\nVALUE: {value}", field.label());
        let out = llm.complete(&CompletionRequest::new(
            PromptPurpose::Plausibility,
            PLAUSIBILITY_SYSTEM_PROMPT,
            user,
        ))?;
        if out.safety_flag {
            return Ok(None);
        }
        Ok(Some(!out.text.trim_start().to_ascii_uppercase().starts_with("INVALID")))
    }

    pub fn advance(
        &self,
        state: &DialogueState,
        user_msg: &str,
        llm: &dyn LlmProvider,
    ) -> Result<DialogueReply, DialogueError> {
        if state.phase.is_terminal() {
            return Err(DialogueError::Terminal(state.phase));
        }
        let mut next = state.clone();
        let mut user_turn = DialogueTurn::user(user_msg, self.clock.now());
        user_turn.phase = Some(state.phase);

        if state.phase == Phase::SafetyPending {
            next.history.push(user_turn);
            return Ok(self.finish_turn(next, Phase::Aborted, self.templates.safety_abort.clone()));
        }

        let mut safety = false;
        let mut rejected = false;
        let (phase, mv) = self.decide(&mut next, user_msg, llm, &mut safety, &mut rejected)?;
        user_turn.rejected = rejected;
        next.history.push(user_turn);
        if safety {
            return Ok(self.finish_turn(next, Phase::SafetyPending, self.templates.care_message.clone()));
        }
        if rejected {
            next.strikes += 1;
            if next.strikes >= MAX_STRIKES {
                // The wording call still runs so the safety channel sees the message.
                if self.word(&next, llm, "abort", "", user_msg)?.is_none() {
                    return Ok(self.finish_turn(next, Phase::SafetyPending, self.templates.care_message.clone()));
                }
                return Ok(self.finish_turn(next, Phase::Aborted, self.templates.strike_abort.clone()));
            }
        } else {
            next.strikes = 0;
        }
        let reply = match mv {
            Move::Fixed(text) => {
                if self.word(&next, llm, "acknowledge", "", user_msg)?.is_none() {
                    return Ok(self.finish_turn(next, Phase::SafetyPending, self.templates.care_message.clone()));
                }
                text
            }
            Move::Worded { directive, subject } => match self.word(&next, llm, directive, &subject, user_msg)? {
                Some(text) => text,
                None => {
                    return Ok(self.finish_turn(next, Phase::SafetyPending, self.templates.care_message.clone()))
                }
            },
            Move::WordedThen { directive, subject, suffix } => {
                match self.word(&next, llm, directive, &subject, user_msg)? {
                    Some(text) => format!("{} {suffix}", text.trim()),
                    None => {
                        return Ok(self.finish_turn(
                            next,
                            Phase::SafetyPending,
                            self.templates.care_message.clone(),
                        ))
                    }
                }
            }
        };
        Ok(self.finish_turn(next, phase, reply))
    }

    /// One wording call. `None` when the provider flagged the exchange.
    fn word(
        &self,
        state: &DialogueState,
        llm: &dyn LlmProvider,
        directive: &str,
        subject: &str,
        user_msg: &str,
    ) -> Result<Option<String>, ProviderError> {
        let user = format!(
            "DIRECTIVE: {directive}\nSUBJECT: {subject}\nPHASE: {:?}\nUSER MESSAGE:\n{}",
            state.phase,
            if user_msg.trim().is_empty() { "(empty)" } else { user_msg }
        );
        let out = llm.complete(&CompletionRequest::new(
            PromptPurpose::Dialogue,
            self.templates.system_prompt(&state.agent_name),
            user,
        ))?;
        if out.safety_flag {
            return Ok(None);
        }
        Ok(Some(out.text.trim().to_string()))
    }

    fn finish_turn(&self, mut state: DialogueState, phase: Phase, reply: String) -> DialogueReply {
        state.phase = phase;
        state.conversation_status = match phase {
            Phase::Completed => ConversationStatus::CompletedAndGenerateProfile,
            Phase::Aborted => ConversationStatus::AbortedWithoutProfile,
            Phase::SummaryConfirm => ConversationStatus::SummaryAndConfirm,
            _ => ConversationStatus::InProgress,
        };
        if phase == Phase::ExitOffer {
            state.show_exit_button = true;
        }
        let mut turn = DialogueTurn::model(reply.clone(), self.clock.now());
        turn.phase = Some(phase);
        state.history.push(turn);
        let ui = state.show_exit_button.then_some(UiFlags {
            show_exit_button: true,
        });
        DialogueReply { state, reply, ui }
    }

    fn summary_reply(&self, c: &Collected) -> String {
        let labels: Vec<String> = c.interests.iter().map(|i| interest_label(&i[0])).collect();
        let year = c.year.map(|y| y.as_str().to_string()).unwrap_or_else(|| super::NOT_APPLICABLE.into());
        let major = c
            .major
            .as_ref()
            .map(|m| m.as_str().to_string())
            .unwrap_or_else(|| super::NOT_APPLICABLE.into());
        format!(
            "{}\n\n{}",
            self.templates.summary_transition,
            self.templates.summary(&year, &major, &labels)
        )
    }

    /// Applies the host rules for the current phase. Sets `rejected` for
    /// input that should count as a strike and `safety` when a provider call
    /// was flagged.
    fn decide(
        &self,
        next: &mut DialogueState,
        msg: &str,
        llm: &dyn LlmProvider,
        safety: &mut bool,
        rejected: &mut bool,
    ) -> Result<(Phase, Move), ProviderError> {
        let phase = next.phase;
        match phase {
            Phase::AwaitAcademic | Phase::AwaitAcademicPartial | Phase::Opening => {
                let parse = self.rules.parse_academic(msg);
                self.apply_academic(next, &parse, llm, safety, rejected)
            }
            Phase::InterestInquiry => {
                let v = self.rules.validate(Field::Interest, msg);
                if v == Validation::NotApplicable || (validate::is_finish_signal(msg) && !v.is_invalid()) {
                    return Ok((Phase::SummaryConfirm, Move::Fixed(self.summary_reply(&next.collected))));
                }
                self.start_interest(next, v, msg, llm, safety, rejected, Phase::InterestInquiry)
            }
            Phase::InterestDeepDive => match self.rules.validate(Field::Interest, msg) {
                Validation::Valid(_) | Validation::NotApplicable => {
                    next.collected.pending.push(msg.trim().to_string());
                    let label = interest_label(&next.collected.pending[0]);
                    Ok((
                        Phase::ExitOffer,
                        Move::WordedThen {
                            directive: "positive_feedback",
                            subject: label.clone(),
                            suffix: self.templates.exit_question(&label),
                        },
                    ))
                }
                Validation::Invalid(_) => {
                    *rejected = true;
                    Ok((phase, redirect(Field::Interest)))
                }
            },
            Phase::ExitOffer => {
                if validate::is_finish_signal(msg) {
                    next.collected.pending.push(msg.trim().to_string());
                    next.collected.flush_pending();
                    return Ok((Phase::SummaryConfirm, Move::Fixed(self.summary_reply(&next.collected))));
                }
                if validate::is_confirmation(msg) && validate::words_after_first(msg) <= 2 {
                    next.collected.flush_pending();
                    return Ok((
                        Phase::InterestInquiry,
                        Move::Worded {
                            directive: "ask_interest",
                            subject: "another interest".into(),
                        },
                    ));
                }
                let v = self.rules.validate(Field::Interest, msg);
                if !v.is_invalid() {
                    next.collected.flush_pending();
                }
                self.start_interest(next, v, msg, llm, safety, rejected, Phase::ExitOffer)
            }
            Phase::SummaryConfirm => {
                if validate::is_confirmation(msg) {
                    return Ok((Phase::Completed, Move::Fixed(self.templates.closing.clone())));
                }
                let parse = self.rules.parse_academic(msg);
                let mut changed = false;
                if let Some(Validation::Valid(y)) = &parse.year {
                    next.collected.year = AcademicYear::parse(y);
                    changed = true;
                }
                if let Some(Validation::Valid(m)) = &parse.major {
                    if !validate::is_negative(m) {
                        next.collected.major = Some(Major::Named(m.clone()));
                        changed = true;
                    }
                }
                if changed {
                    Ok((Phase::SummaryConfirm, Move::Fixed(self.summary_reply(&next.collected))))
                } else {
                    Ok((
                        Phase::SummaryConfirm,
                        Move::Worded {
                            directive: "clarify_summary",
                            subject: "summary".into(),
                        },
                    ))
                }
            }
            Phase::SafetyPending | Phase::Completed | Phase::Aborted => unreachable!("handled by caller"),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn start_interest(
        &self,
        next: &mut DialogueState,
        v: Validation,
        msg: &str,
        llm: &dyn LlmProvider,
        safety: &mut bool,
        rejected: &mut bool,
        stay: Phase,
    ) -> Result<(Phase, Move), ProviderError> {
        match v {
            Validation::Valid(value) => match self.plausible(llm, Field::Interest, &value)? {
                None => {
                    *safety = true;
                    Ok((stay, Move::Fixed(String::new())))
                }
                Some(false) => {
                    *rejected = true;
                    Ok((stay, redirect(Field::Interest)))
                }
                Some(true) => {
                    next.collected.pending = vec![msg.trim().to_string()];
                    Ok((
                        Phase::InterestDeepDive,
                        Move::Worded {
                            directive: "follow_up",
                            subject: interest_label(msg),
                        },
                    ))
                }
            },
            Validation::NotApplicable => Ok((Phase::SummaryConfirm, Move::Fixed(self.summary_reply(&next.collected)))),
            Validation::Invalid(_) => {
                *rejected = true;
                Ok((stay, redirect(Field::Interest)))
            }
        }
    }

    fn apply_academic(
        &self,
        next: &mut DialogueState,
        parse: &AcademicParse,
        llm: &dyn LlmProvider,
        safety: &mut bool,
        rejected: &mut bool,
    ) -> Result<(Phase, Move), ProviderError> {
        let phase = next.phase;
        let missing_now = missing_field(&next.collected);
        if parse.has_invalid() || parse.is_empty() {
            *rejected = true;
            let field = match (&parse.year, &parse.major) {
                (Some(Validation::Invalid(_)), _) => Field::Year,
                (_, Some(Validation::Invalid(_))) => Field::Major,
                _ => missing_now.unwrap_or(Field::Major),
            };
            return Ok((phase, redirect(field)));
        }
        let mut disclaimed = false;
        let mut year = next.collected.year;
        let mut major = next.collected.major.clone();
        match &parse.year {
            Some(Validation::Valid(y)) => {
                match self.plausible(llm, Field::Year, y)? {
                    None => *safety = true,
                    Some(false) => *rejected = true,
                    Some(true) => year = AcademicYear::parse(y),
                }
            }
            Some(Validation::NotApplicable) => {
                year = Some(AcademicYear::NotApplicable);
                disclaimed = true;
            }
            _ => {}
        }
        match &parse.major {
            Some(Validation::Valid(m)) if !*safety => match self.plausible(llm, Field::Major, m)? {
                None => *safety = true,
                Some(false) => *rejected = true,
                Some(true) => major = Some(Major::Named(m.clone())),
            },
            Some(Validation::NotApplicable) => {
                major = Some(Major::NotApplicable);
                disclaimed = true;
            }
            _ => {}
        }
        if *safety {
            return Ok((phase, Move::Fixed(String::new())));
        }
        if *rejected {
            let field = match &parse.major {
                Some(Validation::Valid(_)) if major != next.collected.major || major.is_none() => Field::Major,
                _ => Field::Year,
            };
            return Ok((phase, redirect(field)));
        }
        next.collected.year = year;
        next.collected.major = major;
        if disclaimed {
            // A disclaimer closes the academic step; unresolved fields are not applicable.
            next.collected.year.get_or_insert(AcademicYear::NotApplicable);
            next.collected.major.get_or_insert(Major::NotApplicable);
        }
        match missing_field(&next.collected) {
            None => Ok((
                Phase::InterestInquiry,
                Move::Worded {
                    directive: "ask_interest",
                    subject: "interests".into(),
                },
            )),
            Some(field) => Ok((
                Phase::AwaitAcademicPartial,
                Move::Worded {
                    directive: "ask_missing",
                    subject: field.label().into(),
                },
            )),
        }
    }
}

fn redirect(field: Field) -> Move {
    Move::Worded {
        directive: "redirect",
        subject: field.label().into(),
    }
}

fn missing_field(c: &Collected) -> Option<Field> {
    if c.year.is_none() {
        Some(Field::Year)
    } else if c.major.is_none() {
        Some(Field::Major)
    } else {
        None
    }
}

impl DialogueState {
    /// Whether the collected academic info is complete.
    pub fn academic_complete(&self) -> bool {
        self.collected.academic_complete()
    }

    pub fn in_academic_phase(&self) -> bool {
        self.phase.is_academic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FixedClock;
    use crate::providers::stub::StubLlm;

    fn engine() -> DialogueEngine {
        DialogueEngine::new(
            DialogueTemplates::default(),
            ValidationRules::default(),
            Arc::new(FixedClock::at("2025-08-24T09:00:00Z")),
        )
    }

    fn run(msgs: &[&str]) -> DialogueReply {
        let e = engine();
        let llm = StubLlm::offline();
        let (mut state, reply) = e.start_session_with_id("s1".into(), "Page").unwrap();
        let mut last = DialogueReply { state: state.clone(), reply, ui: None };
        for m in msgs {
            last = e.advance(&state, m, &llm).unwrap();
            state = last.state.clone();
        }
        last
    }

    #[test]
    fn opening_and_empty_name() {
        let e = engine();
        let (state, reply) = e.start_session("Page").unwrap();
        assert!(reply.starts_with("Hey there! I'm Page, your personalized learning partner."));
        assert_eq!(state.phase, Phase::AwaitAcademic);
        assert!(!state.show_exit_button);
        assert!(matches!(e.start_session(""), Err(DialogueError::InvalidArgument(_))));
        let (other, reply2) = e.start_session("Page").unwrap();
        assert_ne!(state.session_id, other.session_id);
        assert_eq!(reply, reply2);
    }

    #[test]
    fn academic_both_fields() {
        let r = run(&["Sophomore, Computer Science"]);
        assert_eq!(r.state.phase, Phase::InterestInquiry);
        assert_eq!(r.state.collected.year, Some(AcademicYear::Sophomore));
        assert_eq!(r.state.collected.major, Some(Major::Named("Computer Science".into())));
    }

    #[test]
    fn partial_then_missing() {
        let r = run(&["I'm a junior"]);
        assert_eq!(r.state.phase, Phase::AwaitAcademicPartial);
        assert!(r.reply.contains("major"));
        let r = run(&["I'm a junior", "Economics"]);
        assert_eq!(r.state.phase, Phase::InterestInquiry);
    }

    #[test]
    fn two_strikes_abort() {
        let r = run(&["my major is loafing"]);
        assert_eq!(r.state.strikes, 1);
        assert_eq!(r.state.phase, Phase::AwaitAcademic);
        let r = run(&["my major is loafing", "napping"]);
        assert_eq!(r.state.phase, Phase::Aborted);
        assert_eq!(r.state.conversation_status.as_str(), "aborted_without_profile");
    }

    #[test]
    fn valid_input_resets_strikes() {
        let r = run(&["my major is loafing", "I'm a senior", "lol"]);
        assert_eq!(r.state.phase, Phase::AwaitAcademicPartial);
        assert_eq!(r.state.strikes, 1);
    }

    #[test]
    fn no_major_disclaimer_proceeds() {
        let r = run(&["I have no major"]);
        assert_eq!(r.state.phase, Phase::InterestInquiry);
        assert_eq!(r.state.collected.major, Some(Major::NotApplicable));
    }

    #[test]
    fn exit_offer_sets_button() {
        let r = run(&["Sophomore, Computer Science", "I love dancing", "Mostly hip-hop with my friends"]);
        assert_eq!(r.state.phase, Phase::ExitOffer);
        assert!(r.state.show_exit_button);
        assert!(r.reply.starts_with("That sounds really fascinating!"));
        assert!(r.reply.ends_with(
            "So, besides dancing, are there any other hobbies you're passionate about? If not, we can get ready to start your personalized lesson."
        ));
        assert_eq!(r.ui, Some(UiFlags { show_exit_button: true }));
    }

    #[test]
    fn finish_confirm_completes() {
        let r = run(&[
            "Sophomore, Computer Science",
            "I love dancing",
            "Mostly hip-hop",
            "That's all",
        ]);
        assert_eq!(r.state.conversation_status, ConversationStatus::SummaryAndConfirm);
        assert!(r.reply.starts_with("Got it! Let me just summarize what we discussed..."));
        assert!(r.state.show_exit_button);
        let r = run(&["Sophomore, Computer Science", "I love dancing", "Mostly hip-hop", "That's all", "Yes"]);
        assert_eq!(r.state.phase, Phase::Completed);
        assert_eq!(r.reply, "Great! Profile confirmed, our personalized journey begins now!");
        assert_eq!(r.state.conversation_status, ConversationStatus::CompletedAndGenerateProfile);
    }

    #[test]
    fn safety_then_abort() {
        let r = run(&["I want to hurt myself"]);
        assert_eq!(r.state.phase, Phase::SafetyPending);
        assert_eq!(r.reply, DialogueTemplates::default().care_message);
        let r = run(&["I want to hurt myself", "ok"]);
        assert_eq!(r.state.phase, Phase::Aborted);
        assert_eq!(r.state.conversation_status, ConversationStatus::AbortedWithoutProfile);
    }

    #[test]
    fn terminal_state_is_rejected_and_input_untouched() {
        let r = run(&["lol", "lol"]);
        let before = r.state.clone();
        let err = engine().advance(&r.state, "hello", &StubLlm::offline()).unwrap_err();
        assert!(matches!(err, DialogueError::Terminal(Phase::Aborted)));
        assert_eq!(before, r.state);
    }

    #[test]
    fn interest_labels() {
        assert_eq!(interest_label("I love dancing"), "dancing");
        assert_eq!(interest_label("I like to play games, mainly RPGs."), "play games");
        assert_eq!(interest_label("!!!"), "that");
    }
}
