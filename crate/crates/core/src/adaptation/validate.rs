use super::neutrality::{check_neutrality, NeutralityViolation};
use super::parse::NONE_SENTINEL;
use super::AdaptationConfig;
use crate::retrieval::ContentSegment;
use crate::text;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub neutrality_violations: Vec<NeutralityViolation>,
    /// Adapted word count over original word count.
    pub length_ratio: f64,
    pub key_term_retention: f64,
    pub key_terms: Vec<String>,
    pub missing_terms: Vec<String>,
    /// Names of the failed checks: `neutrality`, `length_ratio`,
    /// `key_term_retention`, `sentinel`.
    pub failures: Vec<String>,
    pub passed: bool,
}

fn starts_upper(token: &str) -> bool {
    token.chars().find(|c| c.is_alphanumeric()).is_some_and(char::is_uppercase)
}

/// Capitalized multiword terms, then the `top` most frequent content words
/// (ties by first occurrence). Terms are lowercase lexical-token strings.
pub fn extract_key_terms(original: &str, top: usize) -> Vec<String> {
    let mut terms: Vec<String> = Vec::new();
    let mut seen = HashSet::new();

    for sentence in original.split(['.', '!', '?', ';', ':', '\n']) {
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, terms: &mut Vec<String>, seen: &mut HashSet<String>| {
            let words: Vec<&String> = run.iter().skip_while(|w| text::is_stopword(w)).collect();
            if words.len() >= 2 {
                let term = words.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ");
                if seen.insert(term.clone()) {
                    terms.push(term);
                }
            }
            run.clear();
        };
        for token in sentence.split_whitespace() {
            let lex = text::lexical_tokens(token);
            let breaks = token.ends_with(',') || token.ends_with(')') || token.starts_with('(');
            if starts_upper(token) && !lex.is_empty() {
                run.extend(lex);
            } else {
                flush(&mut run, &mut terms, &mut seen);
            }
            if breaks {
                flush(&mut run, &mut terms, &mut seen);
            }
        }
        flush(&mut run, &mut terms, &mut seen);
    }

    let tokens = text::content_tokens(original);
    let mut freq: HashMap<&str, (usize, usize)> = HashMap::new();
    for (i, t) in tokens.iter().enumerate() {
        if t.chars().count() < 3 {
            continue;
        }
        freq.entry(t).or_insert((0, i)).0 += 1;
    }
    let mut ranked: Vec<(&str, usize, usize)> = freq.into_iter().map(|(t, (n, first))| (t, n, first)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    for (t, _, _) in ranked.into_iter().take(top) {
        if seen.insert(t.to_string()) {
            terms.push(t.to_string());
        }
    }
    terms
}

/// Checks one draft against the original. Passing needs no neutrality
/// violation, a length ratio inside the band, enough key-term retention and
/// no leftover `[None]` sentinel in any casing.
pub fn validate_adaptation(original: &ContentSegment, adapted: &str, cfg: &AdaptationConfig) -> ValidationReport {
    let neutrality_violations = check_neutrality(adapted, &cfg.neutrality_phrases);
    let original_words = text::word_count(&original.text).max(1);
    let length_ratio = text::word_count(adapted) as f64 / original_words as f64;

    let key_terms = extract_key_terms(&original.text, cfg.key_terms_top);
    let padded = format!(" {} ", text::lexical_tokens(adapted).join(" "));
    let missing_terms: Vec<String> = key_terms
        .iter()
        .filter(|t| !padded.contains(&format!(" {t} ")))
        .cloned()
        .collect();
    let key_term_retention = if key_terms.is_empty() {
        1.0
    } else {
        (key_terms.len() - missing_terms.len()) as f64 / key_terms.len() as f64
    };

    let mut failures = Vec::new();
    if !neutrality_violations.is_empty() {
        failures.push("neutrality".to_string());
    }
    if !(cfg.min_length_ratio..=cfg.max_length_ratio).contains(&length_ratio) {
        failures.push("length_ratio".to_string());
    }
    if key_term_retention < cfg.retention_threshold {
        failures.push("key_term_retention".to_string());
    }
    if adapted.to_lowercase().contains(&NONE_SENTINEL.to_lowercase()) {
        failures.push("sentinel".to_string());
    }
    ValidationReport {
        passed: failures.is_empty(),
        neutrality_violations,
        length_ratio,
        key_term_retention,
        key_terms,
        missing_terms,
        failures,
    }
}
