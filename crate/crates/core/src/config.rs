//! JSON run configuration. Every section has defaults, so `{}` is valid.

use crate::adaptation::AdaptationConfig;
use crate::profile::ValidationRules;
use crate::providers::http::FetchPolicy;
use crate::providers::{ProviderConfig, ProviderKind};
use crate::retrieval::{ChunkConfig, MIN_CLEANED_CHARS};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProvidersSection {
    pub llm: Option<ProviderConfig>,
    pub embedding: Option<ProviderConfig>,
    pub search: Option<ProviderConfig>,
    pub fetch: FetchPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StubSection {
    /// Fixture index for the stub search provider, relative to the config file.
    pub search_index: Option<PathBuf>,
    pub embedding_dimension: usize,
    /// Clock reading used for every timestamp in stub mode.
    pub fixed_time: String,
}

impl Default for StubSection {
    fn default() -> Self {
        Self {
            search_index: None,
            embedding_dimension: crate::providers::stub::STUB_EMBEDDING_DIMENSION,
            fixed_time: "2025-01-01T00:00:00Z".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalSection {
    pub per_query_cap: usize,
    pub min_cleaned_chars: usize,
    pub chunk: ChunkConfig,
    /// Bound on in-flight provider calls.
    pub concurrency: usize,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        Self {
            per_query_cap: 5,
            min_cleaned_chars: MIN_CLEANED_CHARS,
            chunk: ChunkConfig::default(),
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub scale_min: u8,
    pub scale_max: u8,
    pub agreement_threshold: f64,
    pub reviews_per_item: usize,
    pub seed: u64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            scale_min: 1,
            scale_max: 5,
            agreement_threshold: 0.8,
            reviews_per_item: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub bind: String,
    pub workers: usize,
    /// Environment variable holding the expected `x-api-key`; unset disables the check.
    pub api_key_env: Option<String>,
}

impl Default for ServerSection {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            workers: 2,
            api_key_env: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageConfig {
    pub providers: ProvidersSection,
    pub stub: StubSection,
    pub retrieval: RetrievalSection,
    pub adaptation: AdaptationConfig,
    pub dialogue: ValidationRules,
    pub evaluation: EvaluationSection,
    pub server: ServerSection,
}

impl PageConfig {
    pub fn from_json(raw: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: PageConfig = serde_json::from_str(raw).map_err(|e| ConfigError::Invalid {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|message| ConfigError::Invalid {
            path: origin.to_string(),
            message,
        })?;
        Ok(cfg)
    }

    /// Loads a config file; relative stub paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let mut cfg = Self::from_json(&raw, &path.display().to_string())?;
        if let (Some(index), Some(base)) = (&cfg.stub.search_index, path.parent()) {
            if index.is_relative() {
                cfg.stub.search_index = Some(base.join(index));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.retrieval.chunk.validate().map_err(|e| e.to_string())?;
        self.adaptation.validate().map_err(|e| e.to_string())?;
        if self.retrieval.concurrency == 0 {
            return Err("retrieval.concurrency must be at least 1".into());
        }
        if chrono::DateTime::parse_from_rfc3339(&self.stub.fixed_time).is_err() {
            return Err("stub.fixed_time must be an RFC 3339 timestamp".into());
        }
        if self.stub.embedding_dimension == 0 {
            return Err("stub.embedding_dimension must be at least 1".into());
        }
        let e = &self.evaluation;
        if e.scale_min >= e.scale_max {
            return Err("evaluation scale must satisfy scale_min < scale_max".into());
        }
        if !(0.0..=1.0).contains(&e.agreement_threshold) {
            return Err("evaluation.agreement_threshold must lie in [0, 1]".into());
        }
        if e.reviews_per_item == 0 {
            return Err("evaluation.reviews_per_item must be at least 1".into());
        }
        let p = &self.providers;
        for (want, cfg) in [
            (ProviderKind::Llm, &p.llm),
            (ProviderKind::Embedding, &p.embedding),
            (ProviderKind::Search, &p.search),
        ] {
            if let Some(cfg) = cfg {
                if cfg.kind != want {
                    return Err(format!("provider configured under {want:?} has kind {:?}", cfg.kind));
                }
                cfg.validate().map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(PageConfig::from_json("{}", "t").unwrap(), PageConfig::default());
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(PageConfig::from_json(r#"{"retreival": {}}"#, "t").is_err());
        assert!(PageConfig::from_json(r#"{"retrieval": {"chunk": {"target_tokens": 10, "overlap_tokens": 10}}}"#, "t").is_err());
        assert!(PageConfig::from_json(r#"{"adaptation": {"prompt_version": "v7"}}"#, "t").is_err());
    }

    #[test]
    fn credential_is_a_variable_name_only() {
        let cfg = PageConfig::from_json(
            r#"{"providers": {"llm": {"kind": "llm", "endpoint": "https://llm.example/v1", "credential_env": "PAGE_LLM_KEY"}}}"#,
            "t",
        )
        .unwrap();
        let out = serde_json::to_string(&cfg).unwrap();
        assert!(out.contains("PAGE_LLM_KEY"));
    }
}
