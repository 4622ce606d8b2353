//! Tokenization rules shared by segment statistics, chunking, embedding and
//! validation.
//!
//! Two token notions exist and are kept apart on purpose:
//! * *word tokens* are whitespace-delimited and drive sizing (word counts,
//!   chunk budgets, length ratios);
//! * *lexical tokens* are lowercase alphanumeric runs and drive matching
//!   (stub embeddings, search scoring, key terms).

/// Whitespace-delimited word tokens.
pub fn word_tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}', '*', '_'];

/// True when a word token terminates a sentence: it ends in `.`, `!` or `?`,
/// optionally followed by closing quotes or brackets.
pub fn ends_sentence(token: &str) -> bool {
    let stripped = token.trim_end_matches(CLOSERS);
    stripped.ends_with(['.', '!', '?'])
}

/// Number of sentences in `text`: every sentence-terminating token closes one,
/// and a trailing run of tokens without a terminator counts as one more.
pub fn sentence_count(text: &str) -> usize {
    let mut count = 0;
    let mut open = false;
    for token in text.split_whitespace() {
        open = true;
        if ends_sentence(token) {
            count += 1;
            open = false;
        }
    }
    count + usize::from(open)
}

/// Paragraphs are maximal runs of non-blank lines. Returned slices are trimmed.
pub fn paragraphs(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let blank = line.trim().is_empty();
        if blank {
            if let Some(s) = start.take() {
                out.push(text[s..end].trim());
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + line.len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        out.push(text[s..end].trim());
    }
    out
}

/// Lowercase alphanumeric runs.
pub fn lexical_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "even",
    "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "may",
    "me", "more", "most", "much", "must", "my", "no", "nor", "not", "now", "of", "off", "on",
    "once", "one", "only", "or", "other", "our", "ours", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "upon", "us", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "within", "without", "would", "you", "your", "yours",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Lexical tokens minus stop words.
pub fn content_tokens(text: &str) -> Vec<String> {
    lexical_tokens(text)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .collect()
}

/// Crude plural folding: "modalities" and "modality" share a stem.
pub fn stem(token: &str) -> String {
    if token.len() > 4 && token.ends_with("ies") {
        format!("{}y", &token[..token.len() - 3])
    } else if token.len() > 3 && token.ends_with('s') && !token.ends_with("ss") {
        token[..token.len() - 1].to_string()
    } else {
        token.to_string()
    }
}

/// Collapses runs of whitespace into single spaces and trims.
pub fn squash_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
