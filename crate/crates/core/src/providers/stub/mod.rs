//! Deterministic offline providers.

mod offline;

use super::{
    Completion, CompletionRequest, EmbeddingProvider, EmbeddingVector, LlmProvider,
    ProviderError, SearchHit, SearchProvider,
};
use crate::text;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::path::Path;

pub use offline::infer_interest_tags;

pub const STUB_EMBEDDING_DIMENSION: usize = 256;

const DEFAULT_SAFETY_TERMS: &[&str] = &[
    "self-harm",
    "self harm",
    "hurt myself",
    "kill myself",
    "suicide",
    "end my life",
];

/// Scripted LLM stand-in.
///
/// Resolution order for a request:
/// 1. a configured safety term in the user text blocks it (empty text, flag set);
/// 2. a scripted output keyed by [`CompletionRequest::input_hash`];
/// 3. in offline mode, a purpose-specific deterministic responder;
/// 4. otherwise the echo `STUB:<first 8 hash chars>`.
#[derive(Debug, Clone)]
pub struct StubLlm {
    id: String,
    scripted: BTreeMap<String, String>,
    safety_terms: Vec<String>,
    offline: bool,
}

impl StubLlm {
    /// Echo-only stub: unscripted requests return `STUB:<hash prefix>`.
    pub fn echo() -> Self {
        Self {
            id: "stub-llm".into(),
            scripted: BTreeMap::new(),
            safety_terms: DEFAULT_SAFETY_TERMS.iter().map(|s| s.to_string()).collect(),
            offline: false,
        }
    }

    /// Stub that answers every pipeline prompt with plausible fixed-rule output.
    pub fn offline() -> Self {
        Self {
            offline: true,
            ..Self::echo()
        }
    }

    pub fn with_script(mut self, input_hash: impl Into<String>, output: impl Into<String>) -> Self {
        self.scripted.insert(input_hash.into(), output.into());
        self
    }

    pub fn script(&mut self, request: &CompletionRequest, output: impl Into<String>) {
        self.scripted.insert(request.input_hash(), output.into());
    }

    pub fn with_safety_terms<I, S>(mut self, terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.safety_terms = terms.into_iter().map(Into::into).collect();
        self
    }
}

impl LlmProvider for StubLlm {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ProviderError> {
        request.validate()?;
        let user_lower = request.user.to_lowercase();
        if self
            .safety_terms
            .iter()
            .any(|t| user_lower.contains(&t.to_lowercase()))
        {
            return Ok(Completion::safety_blocked());
        }
        let hash = request.input_hash();
        if let Some(out) = self.scripted.get(&hash) {
            return Ok(Completion::text(out.clone()));
        }
        if self.offline {
            if let Some(out) = offline::respond(request) {
                return Ok(Completion::text(out));
            }
        }
        Ok(Completion::text(format!("STUB:{}", &hash[..8])))
    }
}

/// Signed hashed bag-of-words embedding.
///
/// Each lowercase lexical token is hashed with SHA-256; the first eight
/// digest bytes read big-endian give `h`. The token adds `±1` to bucket
/// `h mod dimension`, negative when the top bit of `h` is set. The
/// accumulated vector is L2-normalized.
#[derive(Debug, Clone)]
pub struct StubEmbedding {
    dimension: usize,
}

impl StubEmbedding {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0);
        Self { dimension }
    }
}

impl Default for StubEmbedding {
    fn default() -> Self {
        Self::new(STUB_EMBEDDING_DIMENSION)
    }
}

pub fn token_hash(token: &str) -> u64 {
    let digest = Sha256::digest(token.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(bytes)
}

/// [`StubEmbedding`] at the default dimension.
pub fn stub_embed(text: &str) -> Result<EmbeddingVector, ProviderError> {
    StubEmbedding::default().embed(text)
}

impl EmbeddingProvider for StubEmbedding {
    fn id(&self) -> &str {
        "stub-embedding"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        let tokens = text::lexical_tokens(text);
        if tokens.is_empty() {
            return Err(ProviderError::EmptyText);
        }
        let mut acc = vec![0f64; self.dimension];
        for token in &tokens {
            let h = token_hash(token);
            let bucket = (h % self.dimension as u64) as usize;
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            acc[bucket] += sign;
        }
        let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            // Every token cancelled out; fall back to the first token alone.
            let h = token_hash(&tokens[0]);
            acc = vec![0.0; self.dimension];
            acc[(h % self.dimension as u64) as usize] = if h >> 63 == 1 { -1.0 } else { 1.0 };
            let values = acc.into_iter().map(|v| v as f32).collect();
            return EmbeddingVector::new(values)
                .map_err(|e| ProviderError::MalformedResponse(e.to_string()));
        }
        let values = acc.into_iter().map(|v| (v / norm) as f32).collect();
        EmbeddingVector::new(values).map_err(|e| ProviderError::MalformedResponse(e.to_string()))
    }
}

/// One document of the stub search index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureDocument {
    pub url: String,
    pub title: String,
    #[serde(default)]
    pub snippet: String,
    pub body: String,
}

/// Search over a local fixture index. A document's score is the number of
/// distinct non-stopword query tokens that occur in its title or body;
/// zero-score documents never match; ties keep fixture order.
#[derive(Debug, Clone, Default)]
pub struct StubSearch {
    docs: Vec<FixtureDocument>,
    vocab: Vec<HashSet<String>>,
}

impl StubSearch {
    pub fn new(docs: Vec<FixtureDocument>) -> Self {
        let vocab = docs
            .iter()
            .map(|d| {
                text::lexical_tokens(&format!("{} {}", d.title, d.body))
                    .into_iter()
                    .collect()
            })
            .collect();
        Self { docs, vocab }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, ProviderError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))?;
        let docs: Vec<FixtureDocument> = serde_json::from_str(&raw)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))?;
        Ok(Self::new(docs))
    }

    pub fn documents(&self) -> &[FixtureDocument] {
        &self.docs
    }

    pub fn score(&self, query: &str, doc_index: usize) -> usize {
        let mut keywords = text::content_tokens(query);
        keywords.sort();
        keywords.dedup();
        keywords
            .iter()
            .filter(|k| self.vocab[doc_index].contains(*k))
            .count()
    }
}

impl SearchProvider for StubSearch {
    fn id(&self) -> &str {
        "stub-search"
    }

    fn search(&self, query: &str, cap: usize) -> Result<Vec<SearchHit>, ProviderError> {
        if query.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("query must be non-empty".into()));
        }
        if cap == 0 {
            return Ok(Vec::new());
        }
        let mut scored: Vec<(usize, usize)> = (0..self.docs.len())
            .map(|i| (self.score(query, i), i))
            .filter(|&(s, _)| s > 0)
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(scored
            .into_iter()
            .take(cap)
            .map(|(_, i)| {
                let d = &self.docs[i];
                SearchHit {
                    url: d.url.clone(),
                    title: d.title.clone(),
                    snippet: d.snippet.clone(),
                    raw_body: Some(d.body.clone()),
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::PromptPurpose;

    #[test]
    fn unscripted_echo_uses_hash_prefix() {
        let llm = StubLlm::echo();
        let req = CompletionRequest::new(PromptPurpose::General, "sys", "hello");
        let mut hasher = Sha256::new();
        hasher.update(b"sys\x1fhello");
        let expected = format!("STUB:{}", &hex::encode(hasher.finalize())[..8]);
        assert_eq!(llm.complete(&req).unwrap().text, expected);
    }

    #[test]
    fn scripted_table_lookup() {
        let req = CompletionRequest::new(PromptPurpose::General, "sys", "hello");
        let llm = StubLlm::echo().with_script(req.input_hash(), "scripted answer");
        assert_eq!(llm.complete(&req).unwrap().text, "scripted answer");
    }

    #[test]
    fn safety_terms_block() {
        let llm = StubLlm::offline();
        let req = CompletionRequest::new(PromptPurpose::Dialogue, "sys", "sometimes I want to hurt myself");
        let out = llm.complete(&req).unwrap();
        assert!(out.safety_flag);
        assert!(out.text.is_empty());
    }

    #[test]
    fn empty_request_is_rejected() {
        let req = CompletionRequest::new(PromptPurpose::General, "sys", "  ");
        assert!(matches!(
            StubLlm::echo().complete(&req),
            Err(ProviderError::InvalidRequest(_))
        ));
    }

    #[test]
    fn embedding_is_bag_of_words() {
        let a = stub_embed("aa bb").unwrap();
        let b = stub_embed("bb aa").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dimension(), 256);
        assert!(matches!(stub_embed(" ,.; "), Err(ProviderError::EmptyText)));
    }

    #[test]
    fn single_token_hits_one_bucket() {
        let v = stub_embed("gradient").unwrap();
        let nonzero: Vec<_> = v.values().iter().filter(|x| **x != 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].abs(), 1.0);
    }

    #[test]
    fn search_scores_by_distinct_keyword_matches() {
        let docs = vec![
            FixtureDocument {
                url: "https://a.example".into(),
                title: "Neural networks".into(),
                snippet: String::new(),
                body: "games and networks".into(),
            },
            FixtureDocument {
                url: "https://b.example".into(),
                title: "Cooking".into(),
                snippet: String::new(),
                body: "recipes".into(),
            },
            FixtureDocument {
                url: "https://c.example".into(),
                title: "Games".into(),
                snippet: String::new(),
                body: "neural games".into(),
            },
        ];
        let search = StubSearch::new(docs);
        let hits = search.search("neural networks in games", 10).unwrap();
        let urls: Vec<_> = hits.iter().map(|h| h.url.as_str()).collect();
        // a: neural, networks, games = 3; c: neural, games = 2; b: 0.
        assert_eq!(urls, vec!["https://a.example", "https://c.example"]);
        assert!(search.search("neural", 0).unwrap().is_empty());
        assert!(search.search("quantum", 5).unwrap().is_empty());
    }
}
