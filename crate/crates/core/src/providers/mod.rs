//! Provider contracts for LLM completion, text embedding and web search.
//!
//! Each contract has a production implementation speaking HTTP+JSON
//! ([`http`]) and a deterministic offline stub ([`stub`]). Stubs are pure
//! functions of their inputs; the end-to-end golden tests rely on that.

pub mod http;
mod rate_limit;
pub mod stub;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;

pub use rate_limit::TokenBucket;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("invalid provider request: {0}")]
    InvalidRequest(String),
    #[error("text contains no word tokens")]
    EmptyText,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider {provider} unavailable after {attempts} attempt(s): {message}")]
    Unavailable {
        provider: String,
        attempts: u32,
        message: String,
    },
    #[error("environment variable {0} holding the provider credential is not set")]
    MissingCredential(String),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
}

impl ProviderError {
    /// Transport-level failures are retried; everything else is final.
    pub fn is_retriable(&self) -> bool {
        matches!(self, ProviderError::Transport(_))
    }
}

/// What a completion is for. Production providers ignore it apart from
/// logging; the offline stub uses it to pick a deterministic responder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptPurpose {
    #[default]
    General,
    Dialogue,
    Plausibility,
    ProfileTags,
    QueryGeneration,
    Adaptation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub temperature: f32,
    pub max_tokens: u32,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            temperature: 0.2,
            max_tokens: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub purpose: PromptPurpose,
    pub system: String,
    pub user: String,
    #[serde(default)]
    pub params: DecodeParams,
}

impl CompletionRequest {
    pub fn new(purpose: PromptPurpose, system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            purpose,
            system: system.into(),
            user: user.into(),
            params: DecodeParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.system.trim().is_empty() || self.user.trim().is_empty() {
            return Err(ProviderError::InvalidRequest(
                "system and user text must be non-empty".into(),
            ));
        }
        Ok(())
    }

    /// Lowercase hex SHA-256 over `system`, a 0x1F separator, and `user`.
    /// Keys the stub's scripted table and its echo output.
    pub fn input_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.system.as_bytes());
        hasher.update([0x1f]);
        hasher.update(self.user.as_bytes());
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub safety_flag: bool,
}

impl Completion {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            safety_flag: false,
        }
    }

    pub fn safety_blocked() -> Self {
        Self {
            text: String::new(),
            safety_flag: true,
        }
    }
}

pub trait LlmProvider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ProviderError>;
}

pub trait EmbeddingProvider: Send + Sync {
    fn id(&self) -> &str;
    /// Declared output dimension; every vector returned by `embed` has it.
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub url: String,
    pub title: String,
    #[serde(default)]
    pub snippet: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_body: Option<String>,
}

pub trait SearchProvider: Send + Sync {
    fn id(&self) -> &str;
    fn search(&self, query: &str, cap: usize) -> Result<Vec<SearchHit>, ProviderError>;
}

/// The three backends a pipeline run needs.
#[derive(Clone)]
pub struct Providers {
    pub llm: Arc<dyn LlmProvider>,
    pub embedding: Arc<dyn EmbeddingProvider>,
    pub search: Arc<dyn SearchProvider>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorError {
    #[error("vector contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("cannot normalize a zero vector")]
    Zero,
    #[error("vector is empty")]
    Empty,
}

/// Real-valued embedding with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f32> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt()
    }

    /// Unit-L2 copy; normalization happens in f64 and rounds once to f32.
    pub fn normalized(&self) -> Result<Self, VectorError> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(VectorError::Zero);
        }
        Ok(Self(
            self.0
                .iter()
                .map(|&v| (f64::from(v) / norm) as f32)
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Llm,
    Embedding,
    Search,
}

/// Connection settings for a production provider. Only the *name* of the
/// environment variable holding the credential is ever stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential_env: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub model: String,
    /// Embedding providers only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    /// Sustained request rate; `None` disables rate limiting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_second: Option<f64>,
    /// Log request/response bodies (credentials redacted).
    #[serde(default)]
    pub debug: bool,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_retries() -> u32 {
    2
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.timeout_ms == 0 {
            return Err(ProviderError::Config("timeout must be > 0".into()));
        }
        if self.endpoint.trim().is_empty() {
            return Err(ProviderError::Config("endpoint must be set".into()));
        }
        if self.kind == ProviderKind::Embedding && self.dimension.unwrap_or(0) == 0 {
            return Err(ProviderError::Config(
                "embedding providers must declare a dimension".into(),
            ));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Reads the credential from the environment, failing fast when a
    /// credential variable is configured but unset.
    pub fn resolve_credential(&self) -> Result<Option<String>, ProviderError> {
        match &self.credential_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .ok()
                .filter(|v| !v.is_empty())
                .map(Some)
                .ok_or_else(|| ProviderError::MissingCredential(var.clone())),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl RetryPolicy {
    pub fn new(max_retries: u32, base_delay: Duration) -> Self {
        Self {
            max_retries,
            base_delay,
        }
    }
}

/// Runs `call` up to `max_retries + 1` times, sleeping with exponential
/// backoff between retriable failures. Exhaustion maps to
/// [`ProviderError::Unavailable`].
pub fn with_retries<T>(
    provider: &str,
    policy: RetryPolicy,
    mut call: impl FnMut() -> Result<T, ProviderError>,
) -> Result<T, ProviderError> {
    let attempts = policy.max_retries + 1;
    let mut last = String::new();
    for attempt in 0..attempts {
        match call() {
            Ok(v) => return Ok(v),
            Err(e) if e.is_retriable() => {
                tracing::warn!(provider, attempt, error = %e, "provider call failed");
                last = e.to_string();
                if attempt + 1 < attempts {
                    std::thread::sleep(policy.base_delay * 2u32.saturating_pow(attempt));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(ProviderError::Unavailable {
        provider: provider.to_string(),
        attempts,
        message: last,
    })
}
