use super::clean::clean_document;
use super::queries::SearchQuery;
use crate::clock::Clock;
use crate::providers::SearchProvider;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use thiserror::Error;

/// Cleaned bodies shorter than this carry too little substance to keep.
pub const MIN_CLEANED_CHARS: usize = 200;

/// Source preference, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTier {
    Scholarly,
    Educational,
    General,
    Low,
}

const SCHOLARLY_HOSTS: &[&str] = &[
    "doi.org", "arxiv.org", "semanticscholar.org", "ncbi.nlm.nih.gov", "jstor.org",
    "springer.com", "sciencedirect.com", "ieee.org", "acm.org", "nature.com", "science.org",
    "researchgate.net", "plos.org", "biorxiv.org", "openreview.net", "aclanthology.org",
    "wiley.com", "tandfonline.com", "ssrn.com", "hal.science", "zenodo.org",
];

const EDUCATIONAL_HOSTS: &[&str] = &[
    "wikipedia.org", "britannica.com", "khanacademy.org", "coursera.org", "edx.org",
    "openstax.org", "stanford.edu", "mit.edu", "scholarpedia.org", "libretexts.org",
    "w3schools.com", "mathworld.wolfram.com",
];

const EDUCATIONAL_SUFFIXES: &[&str] = &[".edu", ".ac.uk", ".ac.jp", ".ac.cn", ".edu.cn", ".edu.au", ".ac.nz"];

const LOW_HOSTS: &[&str] = &[
    "reddit.com", "quora.com", "pinterest.com", "facebook.com", "twitter.com", "x.com",
    "tiktok.com", "instagram.com", "answers.yahoo.com", "doubleclick.net",
];

fn host_matches(host: &str, domain: &str) -> bool {
    host == domain || host.ends_with(&format!(".{domain}"))
}

/// Tier from the URL alone.
///
/// | tier        | rule |
/// |-------------|------|
/// | scholarly   | DOI resolvers, preprint servers, publisher and indexing hosts; any path containing `/doi/` |
/// | educational | academic suffixes (`.edu`, `.ac.uk`, ...), encyclopedias, course platforms |
/// | low         | social media, Q&A forums, ad hosts, hosts or paths with `forum` / `ads.` |
/// | general     | everything else |
///
/// Unparseable URLs are low.
pub fn classify_tier(url: &str) -> SourceTier {
    let Ok(parsed) = url::Url::parse(url) else {
        return SourceTier::Low;
    };
    let host = parsed.host_str().unwrap_or_default().to_ascii_lowercase();
    let path = parsed.path().to_ascii_lowercase();
    if host.is_empty() {
        return SourceTier::Low;
    }
    if SCHOLARLY_HOSTS.iter().any(|d| host_matches(&host, d)) || path.contains("/doi/") {
        return SourceTier::Scholarly;
    }
    if EDUCATIONAL_HOSTS.iter().any(|d| host_matches(&host, d))
        || EDUCATIONAL_SUFFIXES.iter().any(|s| host.ends_with(s) || host.contains(&format!("{s}.")))
    {
        return SourceTier::Educational;
    }
    if LOW_HOSTS.iter().any(|d| host_matches(&host, d))
        || host.starts_with("ads.")
        || host.contains("forum")
        || path.starts_with("/forum")
    {
        return SourceTier::Low;
    }
    SourceTier::General
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievedDocument {
    pub doc_id: String,
    pub url: String,
    pub title: String,
    pub raw_body: String,
    /// Empty when cleaning left nothing.
    pub cleaned_body: String,
    pub source_tier: SourceTier,
    pub query_id: String,
    pub fetched_at: DateTime<Utc>,
}

pub fn doc_id_for(url: &str) -> String {
    let digest = Sha256::digest(url.as_bytes());
    format!("d{}", &hex::encode(digest)[..12])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchWarning {
    pub query_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub documents: Vec<RetrievedDocument>,
    pub warnings: Vec<SearchWarning>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("no queries to execute")]
    EmptyQueries,
    #[error("retrieval unavailable: all {attempted} queries failed")]
    RetrievalUnavailable { attempted: usize, warnings: Vec<SearchWarning> },
}

/// Issues queries in rank order. Each query contributes at most `cap`
/// results; a URL already seen from an earlier query is skipped. Failed
/// queries become warnings unless every query fails.
pub fn execute_search(
    queries: &[SearchQuery],
    search: &dyn SearchProvider,
    cap: usize,
    clock: &dyn Clock,
) -> Result<SearchOutcome, SearchError> {
    if queries.is_empty() {
        return Err(SearchError::EmptyQueries);
    }
    let mut ordered: Vec<&SearchQuery> = queries.iter().collect();
    ordered.sort_by_key(|q| q.rank);
    let mut outcome = SearchOutcome::default();
    let mut seen = HashSet::new();
    let mut failures = 0;
    for query in ordered {
        let hits = match search.search(&query.text, cap) {
            Ok(hits) => hits,
            Err(e) => {
                failures += 1;
                tracing::warn!(query_id = %query.query_id, error = %e, "search query failed");
                outcome.warnings.push(SearchWarning {
                    query_id: query.query_id.clone(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        for hit in hits.into_iter().take(cap) {
            if !seen.insert(hit.url.clone()) {
                continue;
            }
            let raw_body = hit.raw_body.unwrap_or_else(|| hit.snippet.clone());
            let cleaned_body = clean_document(&raw_body).unwrap_or_default();
            outcome.documents.push(RetrievedDocument {
                doc_id: doc_id_for(&hit.url),
                source_tier: classify_tier(&hit.url),
                url: hit.url,
                title: hit.title,
                raw_body,
                cleaned_body,
                query_id: query.query_id.clone(),
                fetched_at: clock.now(),
            });
        }
    }
    if failures == queries.len() {
        return Err(SearchError::RetrievalUnavailable {
            attempted: failures,
            warnings: outcome.warnings,
        });
    }
    Ok(outcome)
}

/// Stable sort by tier (scholarly first), dropping documents whose cleaned
/// body is shorter than `min_chars` characters.
pub fn prioritize_and_filter(docs: Vec<RetrievedDocument>, min_chars: usize) -> Vec<RetrievedDocument> {
    let mut kept: Vec<RetrievedDocument> = docs
        .into_iter()
        .filter(|d| d.cleaned_body.chars().count() >= min_chars)
        .collect();
    kept.sort_by_key(|d| d.source_tier);
    kept
}
