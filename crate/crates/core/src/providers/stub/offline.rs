//! Purpose-specific responders behind [`super::StubLlm::offline`].
//!
//! Each responder reads the machine-readable lines that the prompt builders
//! embed (`DIRECTIVE:`, `FIELD:`, `Major:`, `<script>` ...) and produces a
//! fixed-rule answer. They mirror what a well-behaved model would return so
//! the whole pipeline can run offline.

use crate::providers::{CompletionRequest, PromptPurpose};
use crate::text;
use serde_json::json;

pub(super) fn respond(request: &CompletionRequest) -> Option<String> {
    let user = request.user.as_str();
    match request.purpose {
        PromptPurpose::Dialogue => Some(dialogue(user)),
        PromptPurpose::Plausibility => Some("VALID".to_string()),
        PromptPurpose::ProfileTags => {
            let raw = section_after(user, "INTEREST RAW TEXT:")?;
            let (domain, category, sub, keywords) = infer_interest_tags(&raw);
            Some(
                json!({
                    "domain": domain,
                    "category": category,
                    "sub_category": sub,
                    "keywords": keywords,
                })
                .to_string(),
            )
        }
        PromptPurpose::QueryGeneration => Some(queries(user)),
        PromptPurpose::Adaptation => Some(adapt(user)),
        PromptPurpose::General => None,
    }
}

fn line_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.trim_start().strip_prefix(key))
        .map(str::trim)
        .filter(|v| !v.is_empty())
}

/// Text following a header line up to the next blank line.
fn section_after(text: &str, header: &str) -> Option<String> {
    let start = text.find(header)? + header.len();
    let rest = text[start..].trim_start_matches([' ', '\n']);
    let end = rest.find("\n\n").unwrap_or(rest.len());
    let body = rest[..end].trim();
    (!body.is_empty()).then(|| body.to_string())
}

fn dialogue(user: &str) -> String {
    let directive = line_value(user, "DIRECTIVE:").unwrap_or("acknowledge");
    let subject = line_value(user, "SUBJECT:").unwrap_or("that");
    match directive {
        "ask_missing" => format!("Great, thanks for sharing! And what's your {subject}?"),
        "redirect" => format!(
            "Ha, nice one! As fun as that sounds, I'll need a real answer to tailor things for you. What's your {subject}?"
        ),
        "ask_interest" => {
            "Awesome, thanks! Now for the fun part: what do you love doing in your free time?"
                .to_string()
        }
        "follow_up" => format!(
            "Oh, nice! Could you tell me a bit more about {subject}? What draws you to it?"
        ),
        "positive_feedback" => "That sounds really fascinating!".to_string(),
        "clarify_summary" => "No problem! What should I change?".to_string(),
        _ => "Got it!".to_string(),
    }
}

struct TaxonomyRule {
    triggers: &'static [&'static str],
    requires: &'static [&'static str],
    domain: &'static str,
    category: &'static str,
    sub_category: &'static str,
}

const TAXONOMY: &[TaxonomyRule] = &[
    TaxonomyRule {
        triggers: &["rpg", "rpgs", "role-playing"],
        requires: &["single-player", "single player", "singleplayer"],
        domain: "Entertainment",
        category: "Gaming",
        sub_category: "Single-Player RPG",
    },
    TaxonomyRule {
        triggers: &["rpg", "rpgs", "role-playing"],
        requires: &[],
        domain: "Entertainment",
        category: "Gaming",
        sub_category: "RPG",
    },
    TaxonomyRule {
        triggers: &["game", "games", "gaming", "esports"],
        requires: &[],
        domain: "Entertainment",
        category: "Gaming",
        sub_category: "Video Games",
    },
    TaxonomyRule {
        triggers: &["anime", "manga"],
        requires: &[],
        domain: "Entertainment",
        category: "Animation",
        sub_category: "Anime",
    },
    TaxonomyRule {
        triggers: &["movie", "movies", "film", "films", "cinema"],
        requires: &[],
        domain: "Entertainment",
        category: "Film",
        sub_category: "Movies",
    },
    TaxonomyRule {
        triggers: &["basketball", "football", "soccer", "tennis", "badminton", "volleyball"],
        requires: &[],
        domain: "Sports",
        category: "Ball Sports",
        sub_category: "Team and Racket Sports",
    },
    TaxonomyRule {
        triggers: &["running", "hiking", "climbing", "swimming", "cycling"],
        requires: &[],
        domain: "Sports",
        category: "Outdoor Fitness",
        sub_category: "Endurance Sports",
    },
    TaxonomyRule {
        triggers: &["dance", "dancing", "ballet", "hip-hop"],
        requires: &[],
        domain: "Arts",
        category: "Performing Arts",
        sub_category: "Dance",
    },
    TaxonomyRule {
        triggers: &["music", "guitar", "piano", "singing", "violin", "band"],
        requires: &[],
        domain: "Arts",
        category: "Music",
        sub_category: "Playing and Listening",
    },
    TaxonomyRule {
        triggers: &["photography", "painting", "drawing", "sketching"],
        requires: &[],
        domain: "Arts",
        category: "Visual Arts",
        sub_category: "Image Making",
    },
    TaxonomyRule {
        triggers: &["reading", "novels", "books", "fiction"],
        requires: &[],
        domain: "Literature",
        category: "Reading",
        sub_category: "Fiction",
    },
    TaxonomyRule {
        triggers: &["cooking", "baking", "recipes"],
        requires: &[],
        domain: "Lifestyle",
        category: "Food",
        sub_category: "Cooking",
    },
    TaxonomyRule {
        triggers: &["travel", "traveling", "travelling"],
        requires: &[],
        domain: "Lifestyle",
        category: "Travel",
        sub_category: "Exploring Places",
    },
];

const KEYWORD_LEXICON: &[(&[&str], &str)] = &[
    (&["narrative", "plot", "plots", "story", "stories", "storytelling"], "Story Narrative"),
    (&["world-building", "worldbuilding"], "World-Building"),
    (&["rpg", "rpgs", "role-playing"], "Role-Playing"),
    (&["strategy"], "Strategy"),
    (&["multiplayer", "online"], "Multiplayer"),
    (&["anime", "manga"], "Anime"),
    (&["basketball"], "Basketball"),
    (&["football", "soccer"], "Football"),
    (&["guitar"], "Guitar"),
    (&["piano"], "Piano"),
    (&["dance", "dancing"], "Dance"),
    (&["photography"], "Photography"),
    (&["cooking", "baking"], "Cooking"),
];

/// Hyphen-preserving lowercase words.
fn loose_words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Titles quoted with single or double quotes, e.g. `'Baldur's Gate 3,'`.
/// An apostrophe opens a quote only after whitespace or at the start, and
/// closes one only before whitespace, punctuation, or the end.
fn quoted_titles(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let opens = matches!(c, '\'' | '"' | '\u{2018}' | '\u{201c}')
            && (i == 0 || chars[i - 1].is_whitespace() || chars[i - 1] == '(');
        if opens {
            let mut j = i + 1;
            let mut close = None;
            while j < chars.len() {
                let d = chars[j];
                let closing = matches!(d, '\'' | '"' | '\u{2019}' | '\u{201d}')
                    && (j + 1 == chars.len()
                        || chars[j + 1].is_whitespace()
                        || matches!(chars[j + 1], '.' | ',' | '!' | '?' | ';' | ':' | ')'));
                if closing {
                    close = Some(j);
                    break;
                }
                j += 1;
            }
            if let Some(j) = close {
                let inner: String = chars[i + 1..j].iter().collect();
                let title = inner.trim().trim_end_matches([',', '.', ';', ':']).trim();
                if !title.is_empty() && title.split_whitespace().count() <= 8 {
                    out.push(title.to_string());
                }
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Lexicon-driven tag inference: `(domain, category, sub_category, keywords)`.
/// Quoted titles come first in the keyword list, then lexicon keywords in
/// lexicon order.
pub fn infer_interest_tags(raw: &str) -> (String, String, String, Vec<String>) {
    let words = loose_words(raw);
    let lower = raw.to_lowercase();
    let has = |w: &str| words.iter().any(|x| x == w);
    let rule = TAXONOMY.iter().find(|r| {
        r.triggers.iter().any(|t| has(t))
            && (r.requires.is_empty() || r.requires.iter().any(|q| lower.contains(q)))
    });
    let (domain, category, sub) = match rule {
        Some(r) => (r.domain, r.category, r.sub_category),
        None => ("General", "Personal Interest", "Other"),
    };
    let mut keywords: Vec<String> = Vec::new();
    let push = |keywords: &mut Vec<String>, k: String| {
        if !keywords.iter().any(|e| e.eq_ignore_ascii_case(&k)) {
            keywords.push(k);
        }
    };
    for title in quoted_titles(raw) {
        push(&mut keywords, title);
    }
    for (triggers, keyword) in KEYWORD_LEXICON {
        if triggers.iter().any(|t| has(t)) {
            push(&mut keywords, keyword.to_string());
        }
    }
    if keywords.is_empty() {
        keywords.push(sub.to_string());
    }
    (domain.into(), category.into(), sub.into(), keywords)
}

fn profile_fields(user: &str) -> (Option<String>, Option<String>, Option<String>) {
    let major = line_value(user, "Major:")
        .filter(|m| *m != "not applicable")
        .map(str::to_string);
    let interest_line = user
        .lines()
        .find(|l| l.trim_start().starts_with("- ") && l.contains(" | keywords: "));
    let (sub, keyword) = match interest_line {
        Some(line) => {
            let (tags, kws) = line.split_once(" | keywords: ").unwrap_or((line, ""));
            let sub = tags.rsplit(" > ").next().map(|s| s.trim_start_matches("- ").trim().to_string());
            let keyword = kws.split(", ").next().map(str::trim).filter(|k| !k.is_empty()).map(str::to_string);
            (sub, keyword)
        }
        None => (None, None),
    };
    (major, sub, keyword)
}

fn queries(user: &str) -> String {
    let title = line_value(user, "Title:").unwrap_or("the course topic");
    let (major, sub, keyword) = profile_fields(user);
    let mut out = Vec::new();
    out.push(match &major {
        Some(m) => format!("{title} in {m}"),
        None => format!("{title} fundamentals"),
    });
    let context = sub.clone().or_else(|| keyword.clone()).unwrap_or_else(|| "everyday life".into());
    out.push(format!("application of {title} in {context}"));
    let anchor = keyword.or(sub).unwrap_or_else(|| "real world".into());
    out.push(format!("{title} {anchor} examples"));
    out.iter()
        .enumerate()
        .map(|(i, q)| format!("{}. {q}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

fn first_retrieved_sentence(user: &str) -> Option<String> {
    let start = user.find("\n[1] ")?;
    let block = &user[start + 1..];
    let body_start = block.find('\n')? + 1;
    let body = &block[body_start..];
    let end = body.find("\n\n").unwrap_or(body.len());
    let tokens = text::word_tokens(&body[..end]);
    let mut sentence = Vec::new();
    for t in tokens {
        sentence.push(t);
        if text::ends_sentence(t) || sentence.len() >= 18 {
            break;
        }
    }
    if sentence.is_empty() {
        return None;
    }
    let mut s = sentence.join(" ");
    if !text::ends_sentence(&s) {
        s = s.trim_end_matches([',', ';', ':']).to_string();
        s.push('.');
    }
    Some(s)
}

fn adapt(user: &str) -> String {
    let (Some(open), Some(close)) = (user.find("<script>"), user.rfind("</script>")) else {
        return "[None]".into();
    };
    let content = user[open + "<script>".len()..close].trim();
    if text::sentence_count(content) <= 2 {
        return "[None]".into();
    }
    let (major, sub, keyword) = profile_fields(user);
    let anchor = keyword
        .or(sub)
        .or(major)
        .unwrap_or_else(|| "everyday life".into());
    let bridge = match first_retrieved_sentence(user) {
        Some(s) => format!("To make this concrete, think of {anchor}: {s}"),
        None => format!("To make this concrete, think of how the idea plays out in {anchor}."),
    };
    // Insert the bridge after the first sentence of the first paragraph.
    let paras = text::paragraphs(content);
    let mut out: Vec<String> = Vec::with_capacity(paras.len());
    for (i, para) in paras.iter().enumerate() {
        if i > 0 {
            out.push(para.to_string());
            continue;
        }
        let tokens = text::word_tokens(para);
        let cut = tokens
            .iter()
            .position(|t| text::ends_sentence(t))
            .map(|p| p + 1)
            .unwrap_or(tokens.len());
        let mut rebuilt = tokens[..cut].join(" ");
        rebuilt.push(' ');
        rebuilt.push_str(&bridge);
        if cut < tokens.len() {
            rebuilt.push(' ');
            rebuilt.push_str(&tokens[cut..].join(" "));
        }
        out.push(rebuilt);
    }
    out.join("\n\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_one_interest_tags() {
        let raw = "I like to play games, mainly single-player RPGs with good plots. I'm currently playing 'Baldur's Gate 3,' and I feel the narrative and world-building are amazing. Nothing else to add.";
        let (d, c, s, k) = infer_interest_tags(raw);
        assert_eq!((d.as_str(), c.as_str(), s.as_str()), ("Entertainment", "Gaming", "Single-Player RPG"));
        assert_eq!(k, vec!["Baldur's Gate 3", "Story Narrative", "World-Building", "Role-Playing"]);
    }

    #[test]
    fn quoted_titles_skip_inner_apostrophes() {
        assert_eq!(quoted_titles("playing 'Baldur's Gate 3,' now"), vec!["Baldur's Gate 3"]);
        assert_eq!(quoted_titles("I'm into \"Hollow Knight\"."), vec!["Hollow Knight"]);
        assert!(quoted_titles("it's John's").is_empty());
    }

    #[test]
    fn unknown_interest_is_general() {
        let (d, _, s, k) = infer_interest_tags("collecting stamps");
        assert_eq!(d, "General");
        assert_eq!(k, vec![s]);
    }
}
