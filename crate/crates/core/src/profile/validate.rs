//! Deterministic rule layer for dialogue input.
//!
//! Runs before any LLM plausibility check: length limits, profanity and
//! nonsense lexicons, explicit "not applicable" disclaimers, and field
//! parsing (academic year lexicon, major extraction).

use super::AcademicYear;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Year,
    Major,
    Interest,
}

impl Field {
    pub fn label(self) -> &'static str {
        match self {
            Field::Year => "grade level",
            Field::Major => "major",
            Field::Interest => "interest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Valid(String),
    NotApplicable,
    Invalid(String),
}

impl Validation {
    pub fn is_invalid(&self) -> bool {
        matches!(self, Validation::Invalid(_))
    }
}

/// Lowercase, apostrophes dropped, every other non-alphanumeric run folded
/// into one space.
pub(crate) fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch == '\'' || ch == '\u{2019}' {
            continue;
        }
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

fn contains_phrase(normalized: &str, phrase: &str) -> bool {
    format!(" {normalized} ").contains(&format!(" {phrase} "))
}

const YEAR_LEXICON: &[(&str, AcademicYear)] = &[
    ("freshman", AcademicYear::Freshman),
    ("freshmen", AcademicYear::Freshman),
    ("first year", AcademicYear::Freshman),
    ("1st year", AcademicYear::Freshman),
    ("year 1", AcademicYear::Freshman),
    ("year one", AcademicYear::Freshman),
    ("sophomore", AcademicYear::Sophomore),
    ("second year", AcademicYear::Sophomore),
    ("2nd year", AcademicYear::Sophomore),
    ("year 2", AcademicYear::Sophomore),
    ("year two", AcademicYear::Sophomore),
    ("junior", AcademicYear::Junior),
    ("third year", AcademicYear::Junior),
    ("3rd year", AcademicYear::Junior),
    ("year 3", AcademicYear::Junior),
    ("year three", AcademicYear::Junior),
    ("senior", AcademicYear::Senior),
    ("fourth year", AcademicYear::Senior),
    ("4th year", AcademicYear::Senior),
    ("final year", AcademicYear::Senior),
    ("year 4", AcademicYear::Senior),
    ("year four", AcademicYear::Senior),
    ("graduate student", AcademicYear::Graduate),
    ("grad student", AcademicYear::Graduate),
    ("postgraduate", AcademicYear::Graduate),
    ("graduate", AcademicYear::Graduate),
    ("masters", AcademicYear::Graduate),
    ("phd", AcademicYear::Graduate),
    ("ph d", AcademicYear::Graduate),
    ("doctoral", AcademicYear::Graduate),
];

/// Tunable lexicons. Defaults cover English elicitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationRules {
    pub max_chars: usize,
    pub profanity: Vec<String>,
    pub academic_nonsense: Vec<String>,
    pub interest_nonsense: Vec<String>,
    pub year_disclaimers: Vec<String>,
    pub major_disclaimers: Vec<String>,
    pub interest_disclaimers: Vec<String>,
    /// Disclaim every academic field at once.
    pub student_disclaimers: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for ValidationRules {
    fn default() -> Self {
        Self {
            max_chars: 500,
            profanity: strings(&["fuck", "fucking", "shit", "bitch", "asshole", "bastard", "dick", "crap"]),
            academic_nonsense: strings(&[
                "loafing", "slacking", "slacking off", "napping", "sleeping", "procrastination",
                "procrastinating", "partying", "being lazy", "doing nothing", "nothing", "asdf",
                "qwerty", "lol", "lmao", "idk", "whatever", "blah", "potato", "memes", "your mom",
                "banana", "bananas", "unicorn", "unicorns", "wizardry", "napology",
            ]),
            interest_nonsense: strings(&["asdf", "qwerty", "lol", "lmao", "idk", "whatever", "blah", "your mom"]),
            year_disclaimers: strings(&["no year", "dont have a year", "not in a year"]),
            major_disclaimers: strings(&[
                "no major", "dont have a major", "do not have a major", "havent declared",
                "have not declared", "undeclared", "havent chosen a major", "not declared",
            ]),
            interest_disclaimers: strings(&[
                "no hobbies", "no interests", "dont have any hobbies", "dont have hobbies",
                "dont have any interests", "nothing really",
            ]),
            student_disclaimers: strings(&[
                "not applicable", "not a student", "not in school", "not studying", "n a",
            ]),
        }
    }
}

impl ValidationRules {
    fn any_phrase(list: &[String], normalized: &str) -> bool {
        list.iter().any(|p| contains_phrase(normalized, p))
    }

    fn is_gibberish(&self, text: &str) -> bool {
        let visible: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        if visible.is_empty() {
            return false;
        }
        let alpha = visible.iter().filter(|c| c.is_alphabetic()).count();
        if (alpha as f64) < 0.4 * visible.len() as f64 {
            return true;
        }
        text.split(|c: char| !c.is_ascii_alphabetic()).any(|w| {
            let lower = w.to_ascii_lowercase();
            let no_vowels = lower.len() >= 5 && !lower.contains(['a', 'e', 'i', 'o', 'u', 'y']);
            let repeated = lower.len() >= 4 && lower.chars().all(|c| lower.starts_with(c));
            no_vowels || repeated
        })
    }

    /// Checks shared by every field. `None` means the text passed.
    fn screen(&self, field: Field, text: &str) -> Option<Validation> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Some(Validation::Invalid("empty".into()));
        }
        if trimmed.chars().count() > self.max_chars {
            return Some(Validation::Invalid("too_long".into()));
        }
        let norm = normalize(trimmed);
        if Self::any_phrase(&self.profanity, &norm) {
            return Some(Validation::Invalid("profanity".into()));
        }
        let disclaimers = match field {
            Field::Year => &self.year_disclaimers,
            Field::Major => &self.major_disclaimers,
            Field::Interest => &self.interest_disclaimers,
        };
        let student_wide = field != Field::Interest && Self::any_phrase(&self.student_disclaimers, &norm);
        if student_wide || Self::any_phrase(disclaimers, &norm) || (field == Field::Major && norm == "none") {
            return Some(Validation::NotApplicable);
        }
        let nonsense = match field {
            Field::Interest => &self.interest_nonsense,
            _ => &self.academic_nonsense,
        };
        if Self::any_phrase(nonsense, &norm) || self.is_gibberish(trimmed) {
            return Some(Validation::Invalid("nonsense".into()));
        }
        None
    }

    pub fn validate(&self, field: Field, text: &str) -> Validation {
        if let Some(outcome) = self.screen(field, text) {
            return outcome;
        }
        match field {
            Field::Year => match find_year(&normalize(text)) {
                Some(year) => Validation::Valid(year.as_str().to_string()),
                None => Validation::Invalid("unrecognized_year".into()),
            },
            Field::Major => match clean_major(text) {
                Some(m) => Validation::Valid(m),
                None => Validation::Invalid("unrecognized_major".into()),
            },
            Field::Interest => Validation::Valid(text.trim().to_string()),
        }
    }

    /// Extracts academic fields from one free-text message, honouring an
    /// in-message correction ("Math major... I meant to say Physics").
    pub fn parse_academic(&self, text: &str) -> AcademicParse {
        if let Some((pre, post)) = split_correction(text) {
            let first = self.parse_academic_simple(pre, false);
            let prefer_year = first.major.is_none() && first.year.is_some();
            let second = self.parse_academic_simple(post, prefer_year);
            return AcademicParse {
                year: second.year.or(first.year),
                major: second.major.or(first.major),
            };
        }
        self.parse_academic_simple(text, false)
    }

    fn parse_academic_simple(&self, text: &str, prefer_year: bool) -> AcademicParse {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return AcademicParse::default();
        }
        let norm = normalize(trimmed);
        if Self::any_phrase(&self.profanity, &norm) {
            return AcademicParse {
                year: None,
                major: Some(Validation::Invalid("profanity".into())),
            };
        }
        if trimmed.chars().count() > self.max_chars {
            return AcademicParse {
                year: None,
                major: Some(Validation::Invalid("too_long".into())),
            };
        }
        if Self::any_phrase(&self.student_disclaimers, &norm) {
            return AcademicParse {
                year: Some(Validation::NotApplicable),
                major: Some(Validation::NotApplicable),
            };
        }
        let year = if let Some(y) = find_year(&norm) {
            Some(Validation::Valid(y.as_str().to_string()))
        } else if Self::any_phrase(&self.year_disclaimers, &norm) {
            Some(Validation::NotApplicable)
        } else {
            None
        };
        if prefer_year && year.is_none() {
            let candidate = strip_edges(trimmed);
            return AcademicParse {
                year: (!candidate.is_empty()).then(|| self.validate(Field::Year, &candidate)),
                major: None,
            };
        }
        let major = if Self::any_phrase(&self.major_disclaimers, &norm) {
            Some(Validation::NotApplicable)
        } else {
            major_candidate(trimmed).map(|c| self.validate(Field::Major, &c))
        };
        AcademicParse { year, major }
    }
}

pub fn validate_input(field: Field, text: &str) -> Validation {
    ValidationRules::default().validate(field, text)
}

pub fn parse_academic(text: &str) -> AcademicParse {
    ValidationRules::default().parse_academic(text)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcademicParse {
    pub year: Option<Validation>,
    pub major: Option<Validation>,
}

impl AcademicParse {
    pub fn is_empty(&self) -> bool {
        self.year.is_none() && self.major.is_none()
    }

    pub fn has_invalid(&self) -> bool {
        self.year.as_ref().is_some_and(Validation::is_invalid)
            || self.major.as_ref().is_some_and(Validation::is_invalid)
    }
}

fn find_year(normalized: &str) -> Option<AcademicYear> {
    YEAR_LEXICON
        .iter()
        .find(|(phrase, _)| contains_phrase(normalized, phrase))
        .map(|&(_, y)| y)
}

const CORRECTION_MARKERS: &[&str] = &[
    "i meant to say",
    "sorry, i meant",
    "i mean,",
    "i meant",
    "correction:",
    "actually it's",
    "actually its",
    "actually,",
];

/// ASCII case-insensitive find; byte offsets stay valid for the original.
fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack.to_ascii_lowercase().find(needle)
}

fn rfind_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack.to_ascii_lowercase().rfind(needle)
}

fn split_correction(text: &str) -> Option<(&str, &str)> {
    CORRECTION_MARKERS
        .iter()
        .filter_map(|m| rfind_ci(text, m).map(|pos| (pos, m.len())))
        .max_by_key(|&(pos, len)| (pos, len))
        .map(|(pos, len)| (&text[..pos], &text[pos + len..]))
}

const EDGE_FILLERS: &[&str] = &[
    "i", "im", "i'm", "am", "a", "an", "the", "in", "my", "year", "student", "and", "currently",
    "right", "now", "hi", "hello", "hey", "its", "it's", "of", "at", "university", "college",
    "major", "majoring", "is", "yes", "no", "ok", "okay", "sure", "thanks", "well", "so", "um",
    "uh", "oh", "studying", "study", "say", "to", "just", "called", "actually", "sorry", "be",
    "that", "this", "for", "student's", "undergrad", "undergraduate",
];

fn is_filler(word: &str) -> bool {
    let w = word
        .trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
        .to_ascii_lowercase();
    w.is_empty() || EDGE_FILLERS.contains(&w.as_str())
}

/// Drops filler words and punctuation from both ends of a clause.
fn strip_edges(clause: &str) -> String {
    let words: Vec<&str> = clause.split_whitespace().collect();
    let start = words.iter().position(|w| !is_filler(w));
    let end = words.iter().rposition(|w| !is_filler(w));
    match (start, end) {
        (Some(s), Some(e)) => words[s..=e]
            .join(" ")
            .trim_matches(|c: char| !c.is_alphanumeric() && c != ')' && c != '\'')
            .trim_end_matches('\'')
            .to_string(),
        _ => String::new(),
    }
}

const MAJOR_MARKERS: &[&str] = &[
    "my major is ",
    "majoring in ",
    "major in ",
    "i'm studying ",
    "i am studying ",
    "studying ",
    "i study ",
];

fn clause_end(text: &str) -> usize {
    text.find(['.', ',', ';', '!', '?', '\n']).unwrap_or(text.len())
}

/// Removes every year-lexicon phrase, word-aligned, replacing it with a
/// clause separator.
fn remove_year_phrases(text: &str) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    let norms: Vec<String> = words.iter().map(|w| normalize(w)).collect();
    let mut out: Vec<&str> = Vec::new();
    let mut i = 0;
    'outer: while i < words.len() {
        for (phrase, _) in YEAR_LEXICON {
            let parts: Vec<&str> = phrase.split(' ').collect();
            if i + parts.len() <= words.len()
                && parts.iter().enumerate().all(|(k, p)| norms[i + k] == *p)
            {
                out.push(",");
                i += parts.len();
                continue 'outer;
            }
        }
        out.push(words[i]);
        i += 1;
    }
    out.join(" ")
}

fn major_candidate(text: &str) -> Option<String> {
    for marker in MAJOR_MARKERS {
        if let Some(pos) = find_ci(text, marker) {
            let rest = &text[pos + marker.len()..];
            let cand = strip_edges(&rest[..clause_end(rest)]);
            if !cand.is_empty() {
                return Some(cand);
            }
        }
    }
    let without_year = remove_year_phrases(text);
    // "<subject> major" as a suffix pattern.
    for clause in without_year.split(['.', ',', ';', '!', '\n']) {
        let lower = clause.to_ascii_lowercase();
        if let Some(pos) = lower.find(" major").or_else(|| lower.strip_prefix("major").map(|_| 0)) {
            let after = &lower[pos + " major".len().min(lower.len() - pos)..];
            if after.trim().is_empty() && pos > 0 {
                let cand = strip_edges(&clause[..pos]);
                if !cand.is_empty() {
                    return Some(cand);
                }
            }
        }
    }
    without_year
        .split(['.', ',', ';', '!', '\n'])
        .filter(|c| !c.contains('?'))
        .map(strip_edges)
        .find(|c| !c.is_empty() && c.split_whitespace().count() <= 8)
}

/// Major with conversational framing removed, or `None` when nothing
/// alphabetic is left.
fn clean_major(text: &str) -> Option<String> {
    let cand = major_candidate(text).unwrap_or_else(|| strip_edges(text));
    let cand = cand.trim().to_string();
    let alphabetic = cand.chars().any(char::is_alphabetic);
    (alphabetic && cand.split_whitespace().count() <= 12).then_some(cand)
}

const FINISH_EXACT: &[&str] = &[
    "no", "nope", "nah", "done", "exit", "no thanks", "not really", "none", "nothing", "thats it",
    "thats all", "im done", "finish", "finished", "start", "lets start", "no thank you",
];
const FINISH_CONTAINS: &[&str] = &[
    "thats all", "lets start", "nothing else", "no other", "no more", "thats it", "im done",
    "lets begin", "start the lesson", "ready to start", "lets go", "lets get started",
];
const CONFIRM_WORDS: &[&str] = &[
    "yes", "yeah", "yep", "yup", "correct", "right", "sure", "ok", "okay", "confirmed", "confirm",
    "perfect", "exactly", "absolutely", "definitely",
];
const CONFIRM_CONTAINS: &[&str] = &["looks good", "thats right", "sounds good", "thats correct", "all good"];
const NEGATIVE_WORDS: &[&str] = &["no", "nope", "nah", "wrong", "incorrect"];
const NEGATIVE_CONTAINS: &[&str] = &["not quite", "not right", "thats wrong", "not correct"];

/// The user signals they have nothing more to add.
pub(crate) fn is_finish_signal(text: &str) -> bool {
    let norm = normalize(text);
    FINISH_EXACT.contains(&norm.as_str()) || FINISH_CONTAINS.iter().any(|p| contains_phrase(&norm, p))
}

pub(crate) fn is_confirmation(text: &str) -> bool {
    let norm = normalize(text);
    let first = norm.split(' ').next().unwrap_or_default();
    (CONFIRM_WORDS.contains(&first) && !is_negative(text))
        || CONFIRM_CONTAINS.iter().any(|p| contains_phrase(&norm, p))
}

pub(crate) fn is_negative(text: &str) -> bool {
    let norm = normalize(text);
    let first = norm.split(' ').next().unwrap_or_default();
    NEGATIVE_WORDS.contains(&first) || NEGATIVE_CONTAINS.iter().any(|p| contains_phrase(&norm, p))
}

/// Number of words after a leading yes/no word.
pub(crate) fn words_after_first(text: &str) -> usize {
    normalize(text).split(' ').skip(1).filter(|w| !w.is_empty()).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        assert_eq!(
            validate_input(Field::Major, "Computer Science and Technology"),
            Validation::Valid("Computer Science and Technology".into())
        );
        assert_eq!(validate_input(Field::Major, "I have no major"), Validation::NotApplicable);
        assert_eq!(validate_input(Field::Year, ""), Validation::Invalid("empty".into()));
    }

    #[test]
    fn rule_layer_rejections() {
        assert_eq!(validate_input(Field::Major, "my major is loafing"), Validation::Invalid("nonsense".into()));
        assert_eq!(validate_input(Field::Major, &"x".repeat(501)), Validation::Invalid("too_long".into()));
        assert_eq!(validate_input(Field::Major, "sdfghjk"), Validation::Invalid("nonsense".into()));
        assert_eq!(validate_input(Field::Year, "purple"), Validation::Invalid("unrecognized_year".into()));
        assert_eq!(validate_input(Field::Interest, "shit"), Validation::Invalid("profanity".into()));
        assert_eq!(validate_input(Field::Year, "2nd year"), Validation::Valid("Sophomore".into()));
        assert_eq!(validate_input(Field::Year, "I'm not a student"), Validation::NotApplicable);
    }

    #[test]
    fn academic_parse_variants() {
        let p = parse_academic("Sophomore, Computer Science");
        assert_eq!(p.year, Some(Validation::Valid("Sophomore".into())));
        assert_eq!(p.major, Some(Validation::Valid("Computer Science".into())));

        let p = parse_academic("I'm a junior majoring in Economics.");
        assert_eq!(p.year, Some(Validation::Valid("Junior".into())));
        assert_eq!(p.major, Some(Validation::Valid("Economics".into())));

        let p = parse_academic("I'm a freshman");
        assert_eq!(p.year, Some(Validation::Valid("Freshman".into())));
        assert_eq!(p.major, None);

        let p = parse_academic("Math major... I meant to say Physics");
        assert_eq!(p.major, Some(Validation::Valid("Physics".into())));

        let p = parse_academic("my major is loafing");
        assert!(p.has_invalid());

        let p = parse_academic("I have no major");
        assert_eq!(p.major, Some(Validation::NotApplicable));
        assert_eq!(p.year, None);

        let p = parse_academic("Senior year... actually, I'm a junior");
        assert_eq!(p.year, Some(Validation::Valid("Junior".into())));

        assert!(parse_academic("what do you mean?").is_empty());
        assert!(parse_academic("hi").is_empty());
        // "undergraduate" must not match "graduate".
        assert_eq!(parse_academic("undergraduate studying biology").year, None);
    }

    #[test]
    fn signals() {
        assert!(is_finish_signal("That's all!"));
        assert!(is_finish_signal("Nothing else to add."));
        assert!(is_finish_signal("no"));
        assert!(!is_finish_signal("I also like dancing"));
        assert!(is_confirmation("Yes, that's right"));
        assert!(is_confirmation("looks good to me"));
        assert!(!is_confirmation("no, that's wrong"));
        assert!(is_negative("Nope"));
    }
}
