use serde::{Deserialize, Serialize};

pub const DEFAULT_NEUTRALITY_PHRASES: &[&str] = &[
    "based on your interest",
    "as someone who",
    "since you study",
    "given your major",
    "you mentioned",
    "since you like",
    "since you love",
    "as a fan of",
    "as a student of",
    "because you enjoy",
    "tailored for you",
    "personalized for you",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeutralityViolation {
    pub phrase: String,
    /// Character (not byte) offset of the match.
    pub offset: usize,
}

fn fold(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

/// Every case-insensitive, non-overlapping occurrence of every phrase,
/// ordered by offset then phrase-list order.
pub fn check_neutrality(text: &str, phrases: &[String]) -> Vec<NeutralityViolation> {
    let hay: Vec<char> = text.chars().map(fold).collect();
    let mut out = Vec::new();
    for (rank, phrase) in phrases.iter().enumerate() {
        let needle: Vec<char> = phrase.chars().map(fold).collect();
        if needle.is_empty() || needle.len() > hay.len() {
            continue;
        }
        let mut i = 0;
        while i + needle.len() <= hay.len() {
            if hay[i..i + needle.len()] == needle[..] {
                out.push((i, rank, phrase.clone()));
                i += needle.len();
            } else {
                i += 1;
            }
        }
    }
    out.sort();
    out.into_iter()
        .map(|(offset, _, phrase)| NeutralityViolation { phrase, offset })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Vec<String> {
        DEFAULT_NEUTRALITY_PHRASES.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn leading_phrase() {
        let v = check_neutrality("Based on your interest in RPGs, consider this.", &defaults());
        assert_eq!(v, vec![NeutralityViolation { phrase: "based on your interest".into(), offset: 0 }]);
    }

    #[test]
    fn neutral_text() {
        assert!(check_neutrality("A neural network maps inputs to outputs.", &defaults()).is_empty());
    }

    #[test]
    fn two_phrases_with_char_offsets() {
        let t = "Café note: as someone who codes, and since you study art.";
        let v = check_neutrality(t, &defaults());
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].offset, 11);
        assert_eq!(v[1].phrase, "since you study");
        assert_eq!(v[1].offset, t.chars().count() - "since you study art.".len());
    }
}
