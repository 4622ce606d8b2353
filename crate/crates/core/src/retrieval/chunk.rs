use crate::text;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkConfig {
    pub target_tokens: usize,
    pub overlap_tokens: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            target_tokens: 200,
            overlap_tokens: 40,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChunkError {
    #[error("chunking needs target_tokens > overlap_tokens >= 0 (got {target} / {overlap})")]
    InvalidConfig { target: usize, overlap: usize },
}

impl ChunkConfig {
    pub fn validate(&self) -> Result<(), ChunkError> {
        if self.target_tokens == 0 || self.overlap_tokens >= self.target_tokens {
            return Err(ChunkError::InvalidConfig {
                target: self.target_tokens,
                overlap: self.overlap_tokens,
            });
        }
        Ok(())
    }
}

/// A slice of one retrieved document. Word tokens drive `token_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeChunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub text: String,
    pub token_count: usize,
    /// Leading tokens repeated from the previous chunk.
    pub overlap_tokens: usize,
}

struct Draft {
    text: String,
    tokens: usize,
    overlap: usize,
}

/// Splits `text` into chunks of at most `target_tokens` word tokens.
///
/// Paragraphs are merged greedily while they fit. A paragraph longer than
/// the target is split on its own: each piece after the first repeats up to
/// `overlap_tokens` trailing tokens of the previous piece and ends at the
/// last sentence boundary that keeps at least half of its fresh capacity,
/// or is hard-cut at capacity.
pub fn chunk_document(doc_id: &str, text: &str, cfg: ChunkConfig) -> Result<Vec<KnowledgeChunk>, ChunkError> {
    cfg.validate()?;
    let mut drafts: Vec<Draft> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut current_tokens = 0;

    let flush = |drafts: &mut Vec<Draft>, current: &mut Vec<&str>, current_tokens: &mut usize| {
        if !current.is_empty() {
            drafts.push(Draft {
                text: current.join("\n\n"),
                tokens: *current_tokens,
                overlap: 0,
            });
            current.clear();
            *current_tokens = 0;
        }
    };

    for para in text::paragraphs(text) {
        let tokens = text::word_tokens(para);
        let n = tokens.len();
        if n > cfg.target_tokens {
            flush(&mut drafts, &mut current, &mut current_tokens);
            split_oversized(&tokens, cfg, &mut drafts);
        } else if current_tokens + n <= cfg.target_tokens {
            current.push(para);
            current_tokens += n;
        } else {
            flush(&mut drafts, &mut current, &mut current_tokens);
            current.push(para);
            current_tokens = n;
        }
    }
    flush(&mut drafts, &mut current, &mut current_tokens);

    Ok(drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| KnowledgeChunk {
            chunk_id: format!("{doc_id}-c{i:03}"),
            doc_id: doc_id.to_string(),
            text: d.text,
            token_count: d.tokens,
            overlap_tokens: d.overlap,
        })
        .collect())
}

fn split_oversized(tokens: &[&str], cfg: ChunkConfig, drafts: &mut Vec<Draft>) {
    let n = tokens.len();
    let mut pos = 0;
    let mut first = true;
    while pos < n {
        let carry = if first { 0 } else { cfg.overlap_tokens.min(pos) };
        let capacity = cfg.target_tokens - carry;
        let end = if n - pos <= capacity {
            n
        } else {
            let limit = pos + capacity;
            let min_end = pos + capacity.div_ceil(2);
            (min_end..=limit)
                .rev()
                .find(|&e| text::ends_sentence(tokens[e - 1]))
                .unwrap_or(limit)
        };
        let piece = &tokens[pos - carry..end];
        drafts.push(Draft {
            text: piece.join(" "),
            tokens: piece.len(),
            overlap: carry,
        });
        pos = end;
        first = false;
    }
}

/// Concatenation of every chunk's tokens minus its repeated prefix.
pub fn deoverlapped_tokens(chunks: &[KnowledgeChunk]) -> Vec<&str> {
    chunks
        .iter()
        .flat_map(|c| text::word_tokens(&c.text).into_iter().skip(c.overlap_tokens))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn under_target_is_one_chunk() {
        let t = words(120);
        let c = chunk_document("d", &t, ChunkConfig::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text, t);
    }

    #[test]
    fn stride_case_gives_six() {
        let t = words(1000);
        let c = chunk_document("d", &t, ChunkConfig { target_tokens: 200, overlap_tokens: 40 }).unwrap();
        assert_eq!(c.len(), 6);
        assert!(c.iter().all(|c| c.token_count <= 200));
        assert_eq!(deoverlapped_tokens(&c), text::word_tokens(&t));
    }

    #[test]
    fn small_paragraphs_merge() {
        let t = format!("{}\n\n{}\n\n{}", words(50), words(50), words(50));
        let c = chunk_document("d", &t, ChunkConfig::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text, t);
        assert_eq!(c[0].token_count, 150);
    }

    #[test]
    fn sentence_boundary_preferred() {
        let mut toks: Vec<String> = (0..30).map(|i| format!("t{i}")).collect();
        toks[7] = "end.".into();
        let c = chunk_document("d", &toks.join(" "), ChunkConfig { target_tokens: 10, overlap_tokens: 2 }).unwrap();
        assert!(c[0].text.ends_with("end."));
        assert_eq!(c[0].token_count, 8);
        assert_eq!(c[1].overlap_tokens, 2);
    }

    #[test]
    fn empty_and_invalid() {
        assert!(chunk_document("d", "  \n\n ", ChunkConfig::default()).unwrap().is_empty());
        assert!(chunk_document("d", "x", ChunkConfig { target_tokens: 5, overlap_tokens: 5 }).is_err());
    }
}
