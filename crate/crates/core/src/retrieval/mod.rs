//! Open-ended knowledge retrieval: query generation, web search, cleaning,
//! tiering, chunking, embedding, and cosine top-k selection.

mod chunk;
mod clean;
mod kb;
mod queries;
mod search;
mod segment;

pub use chunk::{chunk_document, deoverlapped_tokens, ChunkConfig, ChunkError, KnowledgeChunk};
pub use clean::{clean_document, CleanError};
pub use kb::{
    build_kb, cosine, select_top_k, KbError, KbMeta, PersonalKnowledgeBase, RetrievedChunk,
    KB_SCHEMA_VERSION,
};
pub use queries::{
    fallback_queries, generate_queries, generate_queries_with_fallback, parse_query_lines,
    QueryError, QueryOrigin, SearchQuery, MAX_QUERY_CHARS, QUERY_SYSTEM_PROMPT,
};
pub use search::{
    classify_tier, doc_id_for, execute_search, prioritize_and_filter, RetrievedDocument, SearchError,
    SearchOutcome, SearchWarning, SourceTier, MIN_CLEANED_CHARS,
};
pub use segment::{ContentSegment, SegmentError, SegmentPosition};
