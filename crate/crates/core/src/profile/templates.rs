use serde::{Deserialize, Serialize};

pub const DIALOGUE_SYSTEM_PROMPT: &str = include_str!("../../resources/prompts/dialogue_system.txt");
pub const PLAUSIBILITY_SYSTEM_PROMPT: &str =
    include_str!("../../resources/prompts/plausibility_system.txt");
pub const SUMMARIZATION_SYSTEM_PROMPT: &str =
    include_str!("../../resources/prompts/summarization_system.txt");

const DEFAULT_TEMPLATES: &str = include_str!("../../resources/dialogue_templates.json");

/// Fixed host-side strings of the elicitation dialogue.
///
/// Placeholders use `{name}` syntax. The defaults are the English resource
/// shipped with the crate; other locales load the same JSON shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DialogueTemplates {
    pub locale: String,
    pub opening: String,
    pub exit_question: String,
    pub summary_transition: String,
    pub summary_body: String,
    pub closing: String,
    pub care_message: String,
    pub safety_abort: String,
    pub strike_abort: String,
}

impl Default for DialogueTemplates {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_TEMPLATES).expect("bundled dialogue templates parse")
    }
}

impl DialogueTemplates {
    pub fn from_json(raw: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(raw)
    }

    pub fn opening(&self, agent_name: &str) -> String {
        self.opening.replace("{agent_name}", agent_name)
    }

    pub fn exit_question(&self, interest: &str) -> String {
        self.exit_question.replace("{interest}", interest)
    }

    pub fn summary(&self, year: &str, major: &str, interests: &[String]) -> String {
        let interests = if interests.is_empty() {
            "none shared".to_string()
        } else {
            interests.join("; ")
        };
        self.summary_body
            .replace("{year}", year)
            .replace("{major}", major)
            .replace("{interests}", &interests)
    }

    pub fn system_prompt(&self, agent_name: &str) -> String {
        DIALOGUE_SYSTEM_PROMPT.replace("{agent_name}", agent_name)
    }
}
