//! HTTP-backed providers.
//!
//! * [`HttpLlm`] speaks the OpenAI-compatible `/chat/completions` shape.
//! * [`HttpEmbedding`] speaks the `/embeddings` shape.
//! * [`HttpSearch`] calls a JSON search endpoint (`GET ?q=&count=`) returning
//!   `{"results": [{"url", "title", "content"|"snippet", "raw_body"?}]}`
//!   and optionally fetches result pages itself.

use super::{
    with_retries, Completion, CompletionRequest, EmbeddingProvider, EmbeddingVector, LlmProvider,
    ProviderConfig, ProviderError, ProviderKind, RetryPolicy, SearchHit, SearchProvider,
    TokenBucket,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::time::Duration;
use ureq::Agent;

const BACKOFF_BASE: Duration = Duration::from_millis(250);

struct Transport {
    agent: Agent,
    config: ProviderConfig,
    credential: Option<String>,
    bucket: Option<TokenBucket>,
}

impl Transport {
    fn new(config: ProviderConfig, expected: ProviderKind) -> Result<Self, ProviderError> {
        config.validate()?;
        if config.kind != expected {
            return Err(ProviderError::Config(format!(
                "expected a {expected:?} provider config, got {:?}",
                config.kind
            )));
        }
        let credential = config.resolve_credential()?;
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(config.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        let bucket = config
            .requests_per_second
            .map(|rate| TokenBucket::new(rate, rate.max(1.0)));
        Ok(Self {
            agent,
            config,
            credential,
            bucket,
        })
    }

    fn policy(&self) -> RetryPolicy {
        RetryPolicy::new(self.config.max_retries, BACKOFF_BASE)
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.config.endpoint.trim_end_matches('/'), path.trim_start_matches('/'))
    }

    fn log_body(&self, direction: &str, body: &Value) {
        if self.config.debug {
            // Bodies never carry the credential; it only travels in the header.
            tracing::debug!(endpoint = %self.config.endpoint, direction, body = %body, "provider exchange");
        }
    }

    fn read_response(&self, mut response: ureq::http::Response<ureq::Body>) -> Result<Value, ProviderError> {
        let status = response.status().as_u16();
        let body: String = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err(ProviderError::Transport(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(ProviderError::MalformedResponse(format!("HTTP {status}: {body}")));
        }
        let value: Value = serde_json::from_str(&body)
            .map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
        self.log_body("response", &value);
        Ok(value)
    }

    fn post_json(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let provider = self.config.endpoint.clone();
        with_retries(&provider, self.policy(), || {
            if let Some(bucket) = &self.bucket {
                bucket.acquire();
            }
            self.log_body("request", body);
            let mut req = self.agent.post(self.url(path)).header("Content-Type", "application/json");
            if let Some(key) = &self.credential {
                req = req.header("Authorization", format!("Bearer {key}"));
            }
            let response = req.send(body.to_string()).map_err(map_transport)?;
            self.read_response(response)
        })
    }

    fn get_json(&self, query: &[(&str, String)]) -> Result<Value, ProviderError> {
        let provider = self.config.endpoint.clone();
        with_retries(&provider, self.policy(), || {
            if let Some(bucket) = &self.bucket {
                bucket.acquire();
            }
            let mut req = self.agent.get(&self.config.endpoint);
            for (k, v) in query {
                req = req.query(*k, v);
            }
            if let Some(key) = &self.credential {
                req = req.header("Authorization", format!("Bearer {key}"));
            }
            let response = req.call().map_err(map_transport)?;
            self.read_response(response)
        })
    }
}

fn map_transport(e: ureq::Error) -> ProviderError {
    ProviderError::Transport(e.to_string())
}

pub struct HttpLlm {
    id: String,
    transport: Transport,
}

impl HttpLlm {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        let id = format!("http-llm:{}", config.model);
        Ok(Self {
            id,
            transport: Transport::new(config, ProviderKind::Llm)?,
        })
    }
}

impl LlmProvider for HttpLlm {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ProviderError> {
        request.validate()?;
        let body = json!({
            "model": self.transport.config.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.params.temperature,
            "max_tokens": request.params.max_tokens,
        });
        let value = self.transport.post_json("chat/completions", &body)?;
        let choice = value
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| ProviderError::MalformedResponse("missing choices[0]".into()))?;
        if choice.get("finish_reason").and_then(Value::as_str) == Some("content_filter") {
            return Ok(Completion::safety_blocked());
        }
        let text = choice
            .pointer("/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| ProviderError::MalformedResponse("missing message content".into()))?;
        Ok(Completion::text(text))
    }
}

pub struct HttpEmbedding {
    id: String,
    dimension: usize,
    transport: Transport,
}

impl HttpEmbedding {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        let dimension = config.dimension.unwrap_or(0);
        let id = format!("http-embedding:{}", config.model);
        Ok(Self {
            id,
            dimension,
            transport: Transport::new(config, ProviderKind::Embedding)?,
        })
    }
}

impl EmbeddingProvider for HttpEmbedding {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        if text.split_whitespace().next().is_none() {
            return Err(ProviderError::EmptyText);
        }
        let body = json!({"model": self.transport.config.model, "input": text});
        let value = self.transport.post_json("embeddings", &body)?;
        let values: Vec<f32> = value
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::MalformedResponse("missing data[0].embedding".into()))?
            .iter()
            .map(|v| v.as_f64().map(|f| f as f32))
            .collect::<Option<_>>()
            .ok_or_else(|| ProviderError::MalformedResponse("non-numeric embedding".into()))?;
        EmbeddingVector::new(values).map_err(|e| ProviderError::MalformedResponse(e.to_string()))
    }
}

/// Robots-style exclusions applied before any result page is fetched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FetchPolicy {
    /// Fetch result pages that arrive without a body.
    #[serde(default)]
    pub fetch_pages: bool,
    #[serde(default)]
    pub excluded_hosts: Vec<String>,
    #[serde(default)]
    pub excluded_path_prefixes: Vec<String>,
}

impl FetchPolicy {
    pub fn allows(&self, url: &str) -> bool {
        let Ok(parsed) = url::Url::parse(url) else {
            return false;
        };
        let host = parsed.host_str().unwrap_or_default().to_ascii_lowercase();
        let host_blocked = self
            .excluded_hosts
            .iter()
            .any(|h| host == *h || host.ends_with(&format!(".{h}")));
        let path_blocked = self
            .excluded_path_prefixes
            .iter()
            .any(|p| parsed.path().starts_with(p.as_str()));
        !(host_blocked || path_blocked)
    }
}

pub struct HttpSearch {
    id: String,
    transport: Transport,
    fetch: FetchPolicy,
}

impl HttpSearch {
    pub fn new(config: ProviderConfig, fetch: FetchPolicy) -> Result<Self, ProviderError> {
        let id = format!("http-search:{}", config.endpoint);
        Ok(Self {
            id,
            transport: Transport::new(config, ProviderKind::Search)?,
            fetch,
        })
    }

    fn fetch_page(&self, url: &str) -> Option<String> {
        if !self.fetch.allows(url) {
            return None;
        }
        let mut response = self.transport.agent.get(url).call().ok()?;
        if !response.status().is_success() {
            return None;
        }
        response.body_mut().read_to_string().ok()
    }
}

impl SearchProvider for HttpSearch {
    fn id(&self) -> &str {
        &self.id
    }

    fn search(&self, query: &str, cap: usize) -> Result<Vec<SearchHit>, ProviderError> {
        if query.trim().is_empty() {
            return Err(ProviderError::InvalidRequest("query must be non-empty".into()));
        }
        if cap == 0 {
            return Ok(Vec::new());
        }
        let value = self
            .transport
            .get_json(&[("q", query.to_string()), ("count", cap.to_string()), ("format", "json".into())])?;
        let results = value
            .get("results")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::MalformedResponse("missing results array".into()))?;
        let mut hits = Vec::new();
        for r in results.iter().take(cap) {
            let Some(url) = r.get("url").and_then(Value::as_str) else {
                continue;
            };
            let title = r.get("title").and_then(Value::as_str).unwrap_or_default();
            let snippet = r
                .get("content")
                .or_else(|| r.get("snippet"))
                .and_then(Value::as_str)
                .unwrap_or_default();
            let mut raw_body = r.get("raw_body").and_then(Value::as_str).map(str::to_string);
            if raw_body.is_none() && self.fetch.fetch_pages {
                raw_body = self.fetch_page(url);
            }
            hits.push(SearchHit {
                url: url.to_string(),
                title: title.to_string(),
                snippet: snippet.to_string(),
                raw_body,
            });
        }
        Ok(hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fetch_policy_excludes_hosts_and_paths() {
        let policy = FetchPolicy {
            fetch_pages: true,
            excluded_hosts: vec!["ads.example".into()],
            excluded_path_prefixes: vec!["/private".into()],
        };
        assert!(policy.allows("https://www.example.org/page"));
        assert!(!policy.allows("https://cdn.ads.example/x"));
        assert!(!policy.allows("https://www.example.org/private/notes"));
        assert!(!policy.allows("not a url"));
    }

    #[test]
    fn wrong_kind_is_a_config_error() {
        let cfg = ProviderConfig {
            kind: ProviderKind::Search,
            endpoint: "http://127.0.0.1:9".into(),
            credential_env: None,
            timeout_ms: 100,
            max_retries: 0,
            model: String::new(),
            dimension: None,
            requests_per_second: None,
            debug: false,
        };
        assert!(matches!(HttpLlm::new(cfg), Err(ProviderError::Config(_))));
    }
}
