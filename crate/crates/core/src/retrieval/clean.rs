//! Markup stripping for fetched pages.
//!
//! Rules, in application order:
//! 1. comments, doctype and processing instructions vanish;
//! 2. chrome elements (`head`, `script`, `style`, `nav`, `header`, `footer`,
//!    `aside`, `form`, `iframe`, ...) are removed with their content;
//! 3. any element whose `class` or `id` contains an ad/boilerplate token
//!    (`ad`, `sponsor`, `banner`, `cookie`, `share`, `related`, ...) is
//!    removed with its content; tokens are split on non-alphanumerics so
//!    `ad-slot` matches but `shadow` does not;
//! 4. block-level tags become paragraph breaks, inline tags disappear,
//!    entities are decoded and whitespace is collapsed;
//! 5. paragraphs matching the boilerplate phrase list are dropped.
//!
//! Input without markup only goes through whitespace normalization and
//! step 5, so already-clean text comes back unchanged.

use crate::text;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CleanError {
    #[error("raw body is empty")]
    EmptyInput,
    #[error("nothing substantive remains after cleaning")]
    EmptyAfterCleaning,
}

const DROPPED_ELEMENTS: &[&str] = &[
    "head", "script", "style", "nav", "header", "footer", "aside", "noscript", "iframe", "form",
    "svg", "button", "template", "select", "canvas", "object", "textarea",
];

const RAW_TEXT_ELEMENTS: &[&str] = &["script", "style", "textarea"];

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

const BLOCK_ELEMENTS: &[&str] = &[
    "address", "article", "blockquote", "body", "br", "dd", "div", "dl", "dt", "figcaption",
    "figure", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "html", "li", "main", "ol", "p", "pre",
    "section", "table", "tr", "ul",
];

const AD_TOKENS: &[&str] = &[
    "ad", "ads", "adsense", "advert", "adverts", "advertisement", "banner", "breadcrumb",
    "breadcrumbs", "comments", "consent", "cookie", "cookies", "menu", "modal", "navbar",
    "newsletter", "popup", "promo", "promoted", "related", "share", "sharing", "sidebar", "social",
    "sponsor", "sponsored", "subscribe",
];

const BOILERPLATE_CONTAINS: &[&str] = &[
    "all rights reserved",
    "we use cookies",
    "cookie policy",
    "accept cookies",
    "subscribe to our",
    "sign up for our",
    "click here",
    "follow us on",
    "privacy policy",
    "terms of use",
    "terms of service",
    "skip to content",
];

const BOILERPLATE_PREFIX: &[&str] = &[
    "advertisement",
    "sponsored",
    "related posts",
    "read more",
    "share this",
    "\u{a9}",
    "copyright",
];

fn is_boilerplate(paragraph: &str) -> bool {
    let lower = paragraph.to_lowercase();
    BOILERPLATE_CONTAINS.iter().any(|p| lower.contains(p))
        || BOILERPLATE_PREFIX.iter().any(|p| lower.starts_with(p))
}

fn has_markup(raw: &str) -> bool {
    raw.as_bytes()
        .windows(2)
        .any(|w| w[0] == b'<' && (w[1].is_ascii_alphabetic() || w[1] == b'/' || w[1] == b'!'))
}

pub fn clean_document(raw_body: &str) -> Result<String, CleanError> {
    if raw_body.trim().is_empty() {
        return Err(CleanError::EmptyInput);
    }
    let paragraphs: Vec<String> = if has_markup(raw_body) {
        strip_markup(raw_body)
    } else {
        text::paragraphs(raw_body)
            .into_iter()
            .map(text::squash_whitespace)
            .collect()
    };
    let kept: Vec<String> = paragraphs
        .into_iter()
        .filter(|p| !p.is_empty() && !is_boilerplate(p))
        .collect();
    if kept.iter().all(|p| !p.chars().any(char::is_alphanumeric)) {
        return Err(CleanError::EmptyAfterCleaning);
    }
    Ok(kept.join("\n\n"))
}

enum Token {
    Text(String),
    Start { name: String, attrs: Vec<(String, String)>, self_closing: bool },
    End(String),
}

fn find_ci(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    let hay = haystack.as_bytes();
    let needle = needle.as_bytes();
    if needle.is_empty() || hay.len() < needle.len() {
        return None;
    }
    (from..=hay.len() - needle.len()).find(|&i| hay[i..i + needle.len()].eq_ignore_ascii_case(needle))
}

fn tokenize(raw: &str) -> Vec<Token> {
    let bytes = raw.as_bytes();
    let mut tokens = Vec::new();
    let mut text_start = 0;
    let mut i = 0;
    let flush = |tokens: &mut Vec<Token>, from: usize, to: usize| {
        if to > from {
            tokens.push(Token::Text(raw[from..to].to_string()));
        }
    };
    while i < bytes.len() {
        if bytes[i] != b'<' || i + 1 >= bytes.len() {
            i += 1;
            continue;
        }
        let next = bytes[i + 1];
        if raw[i..].starts_with("<!--") {
            flush(&mut tokens, text_start, i);
            i = raw[i + 4..].find("-->").map(|p| i + 4 + p + 3).unwrap_or(bytes.len());
            text_start = i;
        } else if next == b'!' || next == b'?' {
            flush(&mut tokens, text_start, i);
            i = raw[i..].find('>').map(|p| i + p + 1).unwrap_or(bytes.len());
            text_start = i;
        } else if next == b'/' || next.is_ascii_alphabetic() {
            flush(&mut tokens, text_start, i);
            let (token, end) = parse_tag(raw, i);
            i = end;
            if let Token::Start { name, self_closing: false, .. } = &token {
                if RAW_TEXT_ELEMENTS.contains(&name.as_str()) {
                    // Raw text content is never tokenized; jump to its end tag.
                    let close = format!("</{name}");
                    let name = name.clone();
                    tokens.push(token);
                    let stop = find_ci(raw, &close, i).unwrap_or(bytes.len());
                    i = raw[stop..].find('>').map(|p| stop + p + 1).unwrap_or(bytes.len());
                    tokens.push(Token::End(name));
                    text_start = i;
                    continue;
                }
            }
            tokens.push(token);
            text_start = i;
        } else {
            i += 1;
        }
    }
    flush(&mut tokens, text_start, bytes.len());
    tokens
}

/// Parses the tag starting at byte `start` (which holds `<`). Returns the
/// token and the byte offset just past `>`.
fn parse_tag(raw: &str, start: usize) -> (Token, usize) {
    let bytes = raw.as_bytes();
    let mut i = start + 1;
    let closing = bytes[i] == b'/';
    if closing {
        i += 1;
    }
    let name_start = i;
    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-' || bytes[i] == b':') {
        i += 1;
    }
    let name = raw[name_start..i].to_ascii_lowercase();
    let mut attrs = Vec::new();
    let mut self_closing = false;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() {
            break;
        }
        match bytes[i] {
            b'>' => {
                i += 1;
                break;
            }
            b'/' => {
                self_closing = true;
                i += 1;
            }
            _ => {
                let a_start = i;
                while i < bytes.len() && !matches!(bytes[i], b'=' | b'>' | b'/') && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                let attr = raw[a_start..i].to_ascii_lowercase();
                while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                let mut value = String::new();
                if i < bytes.len() && bytes[i] == b'=' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                        i += 1;
                    }
                    if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                        let quote = bytes[i];
                        let v_start = i + 1;
                        let v_end = raw[v_start..]
                            .bytes()
                            .position(|b| b == quote)
                            .map(|p| v_start + p)
                            .unwrap_or(bytes.len());
                        value = raw[v_start..v_end].to_string();
                        i = (v_end + 1).min(bytes.len());
                    } else {
                        let v_start = i;
                        while i < bytes.len() && bytes[i] != b'>' && !bytes[i].is_ascii_whitespace() {
                            i += 1;
                        }
                        value = raw[v_start..i].to_string();
                    }
                }
                if !attr.is_empty() {
                    attrs.push((attr, value));
                } else if i < bytes.len() && bytes[i] != b'>' {
                    i += 1;
                }
            }
        }
    }
    let token = if closing {
        Token::End(name)
    } else {
        Token::Start { name, attrs, self_closing }
    };
    (token, i)
}

fn is_ad_marked(attrs: &[(String, String)]) -> bool {
    attrs.iter().filter(|(k, _)| k == "class" || k == "id").any(|(_, v)| {
        v.split(|c: char| !c.is_ascii_alphanumeric())
            .any(|t| AD_TOKENS.contains(&t.to_ascii_lowercase().as_str()))
    })
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let semi = tail.bytes().take(12).position(|b| b == b';');
        let decoded = semi.and_then(|end| {
            let entity = &tail[1..end];
            let ch = match entity {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                "copy" => Some('\u{a9}'),
                "mdash" => Some('\u{2014}'),
                "ndash" => Some('\u{2013}'),
                "hellip" => Some('\u{2026}'),
                "lsquo" => Some('\u{2018}'),
                "rsquo" => Some('\u{2019}'),
                "ldquo" => Some('\u{201c}'),
                "rdquo" => Some('\u{201d}'),
                _ => entity.strip_prefix('#').and_then(|num| {
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(hex) => u32::from_str_radix(hex, 16).ok(),
                        None => num.parse().ok(),
                    };
                    code.and_then(char::from_u32)
                }),
            };
            ch.map(|c| (c, end + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &tail[len..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn strip_markup(raw: &str) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current = String::new();
    let mut skipping: Option<(String, usize)> = None;
    for token in tokenize(raw) {
        if let Some((name, depth)) = skipping.as_mut() {
            match &token {
                Token::Start { name: n, self_closing: false, .. } if n == name => *depth += 1,
                Token::End(n) if n == name => {
                    *depth -= 1;
                    if *depth == 0 {
                        skipping = None;
                    }
                }
                _ => {}
            }
            continue;
        }
        match token {
            Token::Text(t) => current.push_str(&decode_entities(&t)),
            Token::Start { name, attrs, self_closing } => {
                let void = VOID_ELEMENTS.contains(&name.as_str());
                if !void
                    && !self_closing
                    && (DROPPED_ELEMENTS.contains(&name.as_str()) || is_ad_marked(&attrs))
                {
                    skipping = Some((name, 1));
                    continue;
                }
                if BLOCK_ELEMENTS.contains(&name.as_str()) {
                    paragraphs.push(std::mem::take(&mut current));
                } else if matches!(name.as_str(), "td" | "th") {
                    current.push(' ');
                }
            }
            Token::End(name) => {
                if BLOCK_ELEMENTS.contains(&name.as_str()) {
                    paragraphs.push(std::mem::take(&mut current));
                }
            }
        }
    }
    paragraphs.push(current);
    paragraphs
        .iter()
        .map(|p| text::squash_whitespace(p))
        .filter(|p| !p.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_text_is_unchanged() {
        let t = "First paragraph here.\n\nSecond one, with more words.";
        assert_eq!(clean_document(t).unwrap(), t);
    }

    #[test]
    fn inline_tags_and_entities() {
        let html = "<p>A <b>bold</b> &amp; <i>brave</i> claim &#8211; really&#x21;</p><p>Next</p>";
        assert_eq!(clean_document(html).unwrap(), "A bold & brave claim \u{2013} really!\n\nNext");
    }

    #[test]
    fn ad_tokens_match_whole_words_only() {
        let html = "<div class=\"shadow-box\">kept text</div><div class=\"top-ad\">gone</div>";
        assert_eq!(clean_document(html).unwrap(), "kept text");
    }

    #[test]
    fn nested_dropped_elements() {
        let html = "<aside><aside>inner</aside>still aside</aside><p>body</p>";
        assert_eq!(clean_document(html).unwrap(), "body");
    }

    #[test]
    fn script_content_is_not_parsed() {
        let html = "<script>if (a<b) { document.write('<p>x</p>') }</script><p>real</p>";
        assert_eq!(clean_document(html).unwrap(), "real");
    }

    #[test]
    fn all_ads_is_empty() {
        let html = "<div class=\"ad\">Buy</div><div id=\"sponsor\">Now</div>";
        assert_eq!(clean_document(html), Err(CleanError::EmptyAfterCleaning));
        assert_eq!(clean_document("  "), Err(CleanError::EmptyInput));
    }
}
