//! End-to-end orchestration over a [`Store`]: ingest standardized content,
//! build a student's knowledge base for a module, personalize the module and
//! expose what gets served.

use crate::adaptation::{personalize_segment, should_personalize, AdaptationResult, Selection};
use crate::clock::{Clock, FixedClock, SystemClock};
use crate::config::PageConfig;
use crate::course::{ingest_course_dir, Course, Module};
use crate::evaluation::ManifestRow;
use crate::error::{Error, ErrorCategory};
use crate::par::bounded_map;
use crate::profile::StudentProfile;
use crate::providers::http::{HttpEmbedding, HttpLlm, HttpSearch};
use crate::providers::stub::{StubEmbedding, StubLlm, StubSearch};
use crate::providers::Providers;
use crate::retrieval::{
    build_kb, chunk_document, execute_search, generate_queries_with_fallback, prioritize_and_filter,
    KbMeta, PersonalKnowledgeBase, QueryOrigin, RetrievedDocument, SearchError, SearchQuery, SearchWarning,
    KB_SCHEMA_VERSION,
};
use crate::storage::{StorageError, Store};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    #[default]
    Stub,
    Live,
}

/// Live mode resolves every credential here, so a missing key fails before
/// any work starts.
pub fn build_providers(cfg: &PageConfig, mode: ProviderMode) -> Result<Providers, Error> {
    match mode {
        ProviderMode::Stub => {
            let search = match &cfg.stub.search_index {
                Some(path) => StubSearch::from_json_file(path)?,
                None => StubSearch::new(Vec::new()),
            };
            Ok(Providers {
                llm: Arc::new(StubLlm::offline()),
                embedding: Arc::new(StubEmbedding::new(cfg.stub.embedding_dimension)),
                search: Arc::new(search),
            })
        }
        ProviderMode::Live => {
            let missing = |what: &str| Error::config(format!("live mode needs providers.{what}"));
            let llm = cfg.providers.llm.clone().ok_or_else(|| missing("llm"))?;
            let embedding = cfg.providers.embedding.clone().ok_or_else(|| missing("embedding"))?;
            let search = cfg.providers.search.clone().ok_or_else(|| missing("search"))?;
            Ok(Providers {
                llm: Arc::new(HttpLlm::new(llm)?),
                embedding: Arc::new(HttpEmbedding::new(embedding)?),
                search: Arc::new(HttpSearch::new(search, cfg.providers.fetch.clone())?),
            })
        }
    }
}

pub fn build_clock(cfg: &PageConfig, mode: ProviderMode) -> Arc<dyn Clock> {
    match mode {
        ProviderMode::Stub => Arc::new(FixedClock::at(&cfg.stub.fixed_time)),
        ProviderMode::Live => Arc::new(SystemClock),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedQuery {
    #[serde(flatten)]
    pub query: SearchQuery,
    pub origin: QueryOrigin,
}

/// Everything one `retrieve` run saw, kept for audit and corpus statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalRecord {
    pub profile_id: String,
    pub course_id: String,
    pub module_id: String,
    pub kb_id: String,
    pub queries: Vec<RecordedQuery>,
    /// Documents that survived cleaning and filtering, in KB order.
    pub documents: Vec<RetrievedDocument>,
    pub dropped_documents: usize,
    pub chunk_count: usize,
    pub warnings: Vec<SearchWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServedSegment {
    pub segment_id: String,
    pub title: String,
    pub text: String,
}

/// What a student sees. Carries no marker of which segments were adapted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServedModule {
    pub profile_id: String,
    pub module_id: String,
    pub segments: Vec<ServedSegment>,
}

impl ServedModule {
    pub fn original(profile_id: &str, module: &Module) -> Self {
        Self {
            profile_id: profile_id.to_string(),
            module_id: module.module_id.clone(),
            segments: module
                .segments
                .iter()
                .map(|s| ServedSegment {
                    segment_id: s.segment_id.clone(),
                    title: s.title.clone(),
                    text: s.text.clone(),
                })
                .collect(),
        }
    }

    /// Plain-text rendering in the course ingestion format.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                out.push_str("\n---\n\n");
            }
            if !s.title.is_empty() {
                out.push_str(&format!("# {}\n", s.title));
            }
            out.push_str(&s.text);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalizedModule {
    pub profile_id: String,
    pub module_id: String,
    pub kb_id: String,
    pub results: Vec<AdaptationResult>,
}

impl PersonalizedModule {
    pub fn adapted_count(&self) -> usize {
        self.results.iter().filter(|r| r.is_adapted()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub course_id: String,
    pub modules: Vec<(String, usize)>,
}

pub struct Pipeline {
    store: Store,
    config: PageConfig,
    providers: Providers,
    clock: Arc<dyn Clock>,
    kb_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl Pipeline {
    pub fn new(store: Store, config: PageConfig, providers: Providers, clock: Arc<dyn Clock>) -> Self {
        Self {
            store,
            config,
            providers,
            clock,
            kb_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn open(config: PageConfig, storage_root: &Path, mode: ProviderMode) -> Result<Self, Error> {
        config.validate().map_err(Error::config)?;
        let providers = build_providers(&config, mode)?;
        let clock = build_clock(&config, mode);
        let store = Store::open(storage_root)?;
        Ok(Self::new(store, config, providers, clock))
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn config(&self) -> &PageConfig {
        &self.config
    }

    pub fn providers(&self) -> &Providers {
        &self.providers
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn ingest_dir(&self, dir: &Path) -> Result<IngestSummary, Error> {
        let course = ingest_course_dir(dir)?;
        self.save_course(&course)
    }

    pub fn save_course(&self, course: &Course) -> Result<IngestSummary, Error> {
        for module in &course.modules {
            if let Ok(existing) = self.load_module(&module.module_id) {
                if existing.course_id != module.course_id {
                    return Err(Error::new(
                        ErrorCategory::Conflict,
                        format!("module {} already belongs to course {}", module.module_id, existing.course_id),
                    ));
                }
            }
        }
        for module in &course.modules {
            self.store.put(&["modules"], &module.module_id, "module", module)?;
        }
        Ok(IngestSummary {
            course_id: course.course_id.clone(),
            modules: course
                .modules
                .iter()
                .map(|m| (m.module_id.clone(), m.segments.len()))
                .collect(),
        })
    }

    pub fn load_module(&self, module_id: &str) -> Result<Module, Error> {
        Ok(self.store.get(&["modules"], module_id, "module")?)
    }

    pub fn load_profile(&self, profile_id: &str) -> Result<StudentProfile, Error> {
        Ok(self.store.load_profile(profile_id)?)
    }

    fn kb_lock(&self, profile_id: &str, module_id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.kb_locks.lock().expect("kb lock table poisoned");
        locks
            .entry(format!("{profile_id}/{module_id}"))
            .or_insert_with(|| Arc::new(Mutex::new(())))
            .clone()
    }

    /// Queries, searches, cleans, chunks and embeds; persists the KB and the
    /// retrieval record. Segments that will not be personalized issue no
    /// queries.
    pub fn retrieve(&self, profile_id: &str, module_id: &str) -> Result<RetrievalRecord, Error> {
        let profile = self.load_profile(profile_id)?;
        let module = self.load_module(module_id)?;
        let lock = self.kb_lock(profile_id, module_id);
        let _guard = lock.lock().expect("kb writer lock poisoned");
        let (record, kb) = self.build_retrieval(&profile, &module)?;
        self.store.save_kb(&kb)?;
        self.store.put(&["retrieval", profile_id], module_id, "retrieval", &record)?;
        Ok(record)
    }

    fn build_retrieval(
        &self,
        profile: &StudentProfile,
        module: &Module,
    ) -> Result<(RetrievalRecord, PersonalKnowledgeBase), Error> {
        let rc = &self.config.retrieval;
        let eligible: Vec<_> = module
            .segments
            .iter()
            .filter(|s| should_personalize(s, &self.config.adaptation) == Selection::Adapt)
            .collect();

        let generated = bounded_map(&eligible, rc.concurrency, |segment| {
            generate_queries_with_fallback(profile, segment, self.providers.llm.as_ref())
        });
        let mut queries = Vec::new();
        let mut per_segment = Vec::new();
        for result in generated {
            let (qs, origin) = result?;
            queries.extend(qs.iter().cloned().map(|query| RecordedQuery { query, origin }));
            per_segment.push(qs);
        }

        let searched = bounded_map(&per_segment, rc.concurrency, |qs| {
            execute_search(qs, self.providers.search.as_ref(), rc.per_query_cap, self.clock.as_ref())
        });
        let mut seen = HashSet::new();
        let mut documents = Vec::new();
        let mut warnings = Vec::new();
        let mut failed_segments = 0;
        for result in searched {
            match result {
                Ok(outcome) => {
                    warnings.extend(outcome.warnings);
                    documents.extend(outcome.documents.into_iter().filter(|d| seen.insert(d.url.clone())));
                }
                Err(SearchError::RetrievalUnavailable { warnings: w, .. }) => {
                    failed_segments += 1;
                    warnings.extend(w);
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !per_segment.is_empty() && failed_segments == per_segment.len() {
            return Err(Error::new(
                ErrorCategory::Provider,
                format!("retrieval unavailable for every segment of {}", module.module_id),
            ));
        }

        let total = documents.len();
        let documents = prioritize_and_filter(documents, rc.min_cleaned_chars);
        let mut chunks = Vec::new();
        for doc in &documents {
            chunks.extend(chunk_document(&doc.doc_id, &doc.cleaned_body, rc.chunk)?);
        }
        let embedding = self.providers.embedding.as_ref();
        let kb_id = format!("kb-{}-{}", profile.student_id, module.module_id);
        let meta = KbMeta {
            schema_version: KB_SCHEMA_VERSION,
            kb_id: kb_id.clone(),
            profile_id: profile.student_id.clone(),
            segment_set_id: module.module_id.clone(),
            embedding_provider: embedding.id().to_string(),
            dimension: embedding.dimension(),
            count: chunks.len(),
            created_at: self.clock.now(),
        };
        let chunk_count = chunks.len();
        let kb = build_kb(meta, chunks, embedding, rc.concurrency)?;
        let record = RetrievalRecord {
            profile_id: profile.student_id.clone(),
            course_id: module.course_id.clone(),
            module_id: module.module_id.clone(),
            kb_id,
            queries,
            dropped_documents: total - documents.len(),
            documents,
            chunk_count,
            warnings,
        };
        Ok((record, kb))
    }

    /// Uses the stored KB when one exists, otherwise retrieves first.
    pub fn personalize(&self, profile_id: &str, module_id: &str) -> Result<PersonalizedModule, Error> {
        let profile = self.load_profile(profile_id)?;
        let module = self.load_module(module_id)?;
        let kb = match self.store.load_kb(profile_id, module_id) {
            Ok(kb) => kb,
            Err(StorageError::NotFound { .. }) => {
                self.retrieve(profile_id, module_id)?;
                self.store.load_kb(profile_id, module_id)?
            }
            Err(e) => return Err(e.into()),
        };
        let providers = &self.providers;
        let cfg = &self.config.adaptation;
        let results = bounded_map(&module.segments, self.config.retrieval.concurrency, |segment| {
            personalize_segment(&profile, segment, &kb, providers.llm.as_ref(), providers.embedding.as_ref(), cfg)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

        let personalized = PersonalizedModule {
            profile_id: profile_id.to_string(),
            module_id: module_id.to_string(),
            kb_id: kb.meta().kb_id.clone(),
            results,
        };
        let served = serve(&module, Some(&personalized), profile_id);
        self.store.put(&["adaptations", profile_id], module_id, "adaptation", &personalized)?;
        self.store.put(&["served", profile_id], module_id, "served", &served)?;
        crate::storage::atomic_write(
            &self.served_text_path(profile_id, module_id)?,
            served.render_text().as_bytes(),
        )?;
        Ok(personalized)
    }

    pub fn served_text_path(&self, profile_id: &str, module_id: &str) -> Result<std::path::PathBuf, Error> {
        crate::storage::validate_id(profile_id)?;
        crate::storage::validate_id(module_id)?;
        Ok(self.store.root().join("served").join(profile_id).join(format!("{module_id}.txt")))
    }

    /// Served segments for a student, recomputed from the stored adaptation
    /// results. Without a personalization run the originals are served.
    pub fn served_content(&self, profile_id: &str, module_id: &str) -> Result<ServedModule, Error> {
        crate::storage::validate_id(profile_id)?;
        let module = self.load_module(module_id)?;
        let personalized: Option<PersonalizedModule> =
            match self.store.get(&["adaptations", profile_id], module_id, "adaptation") {
                Ok(p) => Some(p),
                Err(StorageError::NotFound { .. }) => None,
                Err(e) => return Err(e.into()),
            };
        Ok(serve(&module, personalized.as_ref(), profile_id))
    }

    /// One manifest row per stored retrieval record.
    pub fn corpus_manifest(&self) -> Result<Vec<ManifestRow>, Error> {
        let mut rows = Vec::new();
        for profile_id in self.store.list_dirs(&["retrieval"])? {
            for module_id in self.store.list(&["retrieval", &profile_id])? {
                let record: RetrievalRecord = self.store.get(&["retrieval", &profile_id], &module_id, "retrieval")?;
                let words = self.load_module(&module_id).map(|m| m.word_count()).unwrap_or(0);
                rows.push(ManifestRow {
                    course: record.course_id.clone(),
                    sample_id: format!("{profile_id}/{module_id}"),
                    words: words as u64,
                    queries: record.queries.len() as u64,
                    retrieved_docs: record.documents.len() as u64,
                });
            }
        }
        Ok(rows)
    }
}

/// Applies the fallback rule segment by segment.
pub fn serve(module: &Module, personalized: Option<&PersonalizedModule>, profile_id: &str) -> ServedModule {
    let mut served = ServedModule::original(profile_id, module);
    let Some(p) = personalized else { return served };
    for (out, segment) in served.segments.iter_mut().zip(&module.segments) {
        if let Some(result) = p.results.iter().find(|r| r.segment_id == segment.segment_id) {
            out.text = result.served_text(segment).to_string();
        }
    }
    served
}
