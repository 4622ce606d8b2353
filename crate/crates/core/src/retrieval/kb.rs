//! Per-student knowledge base: ordered chunks with unit-norm embeddings and
//! an exhaustive cosine top-k scan.
//!
//! On disk a KB is a directory:
//! * `meta.json`: [`KbMeta`];
//! * `chunks.jsonl`: one [`KnowledgeChunk`] per line, insertion order;
//! * `vectors.bin`: magic `PKBV`, u32 version, u32 dimension, u64 count,
//!   then `count * dimension` little-endian f32 values, row-major.

use super::chunk::KnowledgeChunk;
use crate::par::bounded_map;
use crate::providers::{EmbeddingProvider, EmbeddingVector, ProviderError};
use crate::storage::atomic_write;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::io::BufRead;
use std::path::Path;
use thiserror::Error;

pub const KB_SCHEMA_VERSION: u32 = 1;
const VECTOR_MAGIC: &[u8; 4] = b"PKBV";
const VECTOR_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("embedding dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("embedding chunk {chunk_id}: {source}")]
    Embedding {
        chunk_id: String,
        #[source]
        source: ProviderError,
    },
    #[error("knowledge base is corrupt: {0}")]
    Corrupt(String),
    #[error("knowledge base schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("knowledge base io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbMeta {
    pub schema_version: u32,
    pub kb_id: String,
    pub profile_id: String,
    /// Module whose segments share this KB.
    pub segment_set_id: String,
    pub embedding_provider: String,
    pub dimension: usize,
    pub count: usize,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonalKnowledgeBase {
    meta: KbMeta,
    chunks: Vec<KnowledgeChunk>,
    vectors: Vec<f32>,
}

/// One top-k hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedChunk {
    /// Insertion index in the KB.
    pub index: usize,
    pub chunk_id: String,
    pub text: String,
    pub similarity: f64,
}

/// Cosine similarity in f64, clamped to [-1, 1].
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (f64::from(*x), f64::from(*y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

impl PersonalKnowledgeBase {
    /// Empty KB for a provider of the given dimension.
    pub fn empty(meta: KbMeta) -> Self {
        Self {
            meta: KbMeta { count: 0, ..meta },
            chunks: Vec::new(),
            vectors: Vec::new(),
        }
    }

    /// Assembles a KB from already-normalized vectors.
    pub fn from_parts(
        meta: KbMeta,
        chunks: Vec<KnowledgeChunk>,
        vectors: Vec<EmbeddingVector>,
    ) -> Result<Self, KbError> {
        if chunks.len() != vectors.len() {
            return Err(KbError::Corrupt(format!(
                "{} chunks but {} vectors",
                chunks.len(),
                vectors.len()
            )));
        }
        let mut flat = Vec::with_capacity(chunks.len() * meta.dimension);
        for v in &vectors {
            if v.dimension() != meta.dimension {
                return Err(KbError::DimensionMismatch {
                    expected: meta.dimension,
                    found: v.dimension(),
                });
            }
            flat.extend_from_slice(v.values());
        }
        Ok(Self {
            meta: KbMeta {
                count: chunks.len(),
                ..meta
            },
            chunks,
            vectors: flat,
        })
    }

    pub fn meta(&self) -> &KbMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.meta.dimension
    }

    pub fn chunks(&self) -> &[KnowledgeChunk] {
        &self.chunks
    }

    pub fn vector(&self, index: usize) -> &[f32] {
        let d = self.meta.dimension;
        &self.vectors[index * d..(index + 1) * d]
    }

    pub fn save(&self, dir: &Path) -> Result<(), KbError> {
        std::fs::create_dir_all(dir)?;
        let meta = serde_json::to_string_pretty(&self.meta).expect("kb meta serializes") + "\n";
        let mut lines = String::new();
        for chunk in &self.chunks {
            lines.push_str(&serde_json::to_string(chunk).expect("chunk serializes"));
            lines.push('\n');
        }
        let mut bin = Vec::with_capacity(HEADER_LEN + self.vectors.len() * 4);
        bin.extend_from_slice(VECTOR_MAGIC);
        bin.extend_from_slice(&VECTOR_VERSION.to_le_bytes());
        bin.extend_from_slice(&(self.meta.dimension as u32).to_le_bytes());
        bin.extend_from_slice(&(self.chunks.len() as u64).to_le_bytes());
        for v in &self.vectors {
            bin.extend_from_slice(&v.to_le_bytes());
        }
        // Vectors and chunks first, metadata last: a KB without meta.json is
        // treated as absent.
        atomic_write(&dir.join("vectors.bin"), &bin)?;
        atomic_write(&dir.join("chunks.jsonl"), lines.as_bytes())?;
        atomic_write(&dir.join("meta.json"), meta.as_bytes())?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, KbError> {
        let raw_meta = std::fs::read_to_string(dir.join("meta.json"))?;
        let value: serde_json::Value =
            serde_json::from_str(&raw_meta).map_err(|e| KbError::Corrupt(format!("meta.json: {e}")))?;
        let found = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| KbError::Corrupt("meta.json lacks schema_version".into()))?;
        if found != u64::from(KB_SCHEMA_VERSION) {
            return Err(KbError::SchemaVersion {
                found: found as u32,
                expected: KB_SCHEMA_VERSION,
            });
        }
        let meta: KbMeta =
            serde_json::from_value(value).map_err(|e| KbError::Corrupt(format!("meta.json: {e}")))?;

        let file = std::fs::File::open(dir.join("chunks.jsonl"))?;
        let mut chunks = Vec::with_capacity(meta.count);
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let chunk: KnowledgeChunk = serde_json::from_str(&line)
                .map_err(|e| KbError::Corrupt(format!("chunks.jsonl line {}: {e}", i + 1)))?;
            chunks.push(chunk);
        }

        let bin = std::fs::read(dir.join("vectors.bin"))?;
        if bin.len() < HEADER_LEN || &bin[..4] != VECTOR_MAGIC {
            return Err(KbError::Corrupt("vectors.bin header".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bin[o..o + 4].try_into().expect("4 bytes"));
        let version = u32_at(4);
        if version != VECTOR_VERSION {
            return Err(KbError::SchemaVersion {
                found: version,
                expected: VECTOR_VERSION,
            });
        }
        let dim = u32_at(8) as usize;
        let count = u64::from_le_bytes(bin[12..20].try_into().expect("8 bytes")) as usize;
        if dim != meta.dimension || count != meta.count || count != chunks.len() {
            return Err(KbError::Corrupt(format!(
                "vector header ({count} x {dim}) disagrees with metadata ({} x {}) or chunk file ({})",
                meta.count,
                meta.dimension,
                chunks.len()
            )));
        }
        let expected_len = HEADER_LEN + count * dim * 4;
        if bin.len() != expected_len {
            return Err(KbError::Corrupt(format!(
                "vectors.bin is {} bytes, expected {expected_len}",
                bin.len()
            )));
        }
        let vectors = bin[HEADER_LEN..]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
            .collect();
        Ok(Self { meta, chunks, vectors })
    }
}

/// Embeds every chunk (at most `concurrency` calls in flight), normalizes,
/// and indexes in input order.
pub fn build_kb(
    meta: KbMeta,
    chunks: Vec<KnowledgeChunk>,
    embed: &dyn EmbeddingProvider,
    concurrency: usize,
) -> Result<PersonalKnowledgeBase, KbError> {
    let declared = embed.dimension();
    if declared != meta.dimension {
        return Err(KbError::DimensionMismatch {
            expected: meta.dimension,
            found: declared,
        });
    }
    let results = bounded_map(&chunks, concurrency, |chunk| embed.embed(&chunk.text));
    let mut vectors = Vec::with_capacity(chunks.len());
    for (chunk, result) in chunks.iter().zip(results) {
        let v = result.map_err(|source| KbError::Embedding {
            chunk_id: chunk.chunk_id.clone(),
            source,
        })?;
        if v.dimension() != declared {
            return Err(KbError::DimensionMismatch {
                expected: declared,
                found: v.dimension(),
            });
        }
        let v = v.normalized().map_err(|e| KbError::Embedding {
            chunk_id: chunk.chunk_id.clone(),
            source: ProviderError::MalformedResponse(e.to_string()),
        })?;
        vectors.push(v);
    }
    PersonalKnowledgeBase::from_parts(meta, chunks, vectors)
}

fn rank_order(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// The `k` chunks most cosine-similar to `query`, best first; ties go to the
/// earlier insertion index. Returns everything when the KB holds fewer.
pub fn select_top_k(
    kb: &PersonalKnowledgeBase,
    query: &[f32],
    k: usize,
) -> Result<Vec<RetrievedChunk>, KbError> {
    if k == 0 {
        return Err(KbError::InvalidK);
    }
    if query.len() != kb.dimension() {
        return Err(KbError::DimensionMismatch {
            expected: kb.dimension(),
            found: query.len(),
        });
    }
    let mut scored: Vec<(usize, f64)> = (0..kb.len()).map(|i| (i, cosine(kb.vector(i), query))).collect();
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_by(rank_order);
    Ok(scored
        .into_iter()
        .map(|(i, similarity)| {
            let chunk = &kb.chunks[i];
            RetrievedChunk {
                index: i,
                chunk_id: chunk.chunk_id.clone(),
                text: chunk.text.clone(),
                similarity,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::stub::{stub_embed, StubEmbedding};

    fn meta(dim: usize) -> KbMeta {
        KbMeta {
            schema_version: KB_SCHEMA_VERSION,
            kb_id: "kb".into(),
            profile_id: "p".into(),
            segment_set_id: "m".into(),
            embedding_provider: "stub-embedding".into(),
            dimension: dim,
            count: 0,
            created_at: DateTime::parse_from_rfc3339("2025-01-01T00:00:00Z").unwrap().with_timezone(&Utc),
        }
    }

    fn chunk(i: usize, text: &str) -> KnowledgeChunk {
        KnowledgeChunk {
            chunk_id: format!("c{i}"),
            doc_id: "d".into(),
            text: text.into(),
            token_count: text.split_whitespace().count(),
            overlap_tokens: 0,
        }
    }

    #[test]
    fn empty_kb_is_queryable() {
        let kb = build_kb(meta(256), vec![], &StubEmbedding::default(), 4).unwrap();
        assert!(kb.is_empty());
        assert!(select_top_k(&kb, &vec![1.0; 256], 5).unwrap().is_empty());
    }

    #[test]
    fn stored_vector_equals_stub() {
        let kb = build_kb(meta(256), vec![chunk(0, "abc")], &StubEmbedding::default(), 1).unwrap();
        assert_eq!(kb.vector(0), stub_embed("abc").unwrap().values());
    }

    #[test]
    fn identical_vector_ranks_first() {
        let chunks = vec![chunk(0, "cats purr"), chunk(1, "neural networks learn"), chunk(2, "dogs bark")];
        let kb = build_kb(meta(256), chunks, &StubEmbedding::default(), 2).unwrap();
        let q = stub_embed("neural networks learn").unwrap();
        let top = select_top_k(&kb, q.values(), 5).unwrap();
        assert_eq!(top.len(), 3);
        assert_eq!(top[0].chunk_id, "c1");
        assert!((top[0].similarity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            build_kb(meta(128), vec![], &StubEmbedding::default(), 1),
            Err(KbError::DimensionMismatch { expected: 128, found: 256 })
        ));
        let kb = build_kb(meta(256), vec![chunk(0, "a")], &StubEmbedding::default(), 1).unwrap();
        assert!(matches!(select_top_k(&kb, &[1.0; 3], 1), Err(KbError::DimensionMismatch { .. })));
        assert!(matches!(select_top_k(&kb, &[1.0; 256], 0), Err(KbError::InvalidK)));
    }

    #[test]
    fn ties_break_by_insertion() {
        let chunks = vec![chunk(0, "same words"), chunk(1, "other"), chunk(2, "same words")];
        let kb = build_kb(meta(256), chunks, &StubEmbedding::default(), 1).unwrap();
        let q = stub_embed("same words").unwrap();
        let top = select_top_k(&kb, q.values(), 2).unwrap();
        assert_eq!(top.iter().map(|c| c.index).collect::<Vec<_>>(), vec![0, 2]);
    }
}
