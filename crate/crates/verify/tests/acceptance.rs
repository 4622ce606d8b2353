//! Acceptance suite. Every criterion runs with stub providers and prints a
//! single PASS or FAIL line; the process exits non-zero if any fails.

use page_core::adaptation::{
    check_neutrality, personalize_segment, should_personalize, validate_adaptation, AdaptationConfig, Selection,
    DEFAULT_NEUTRALITY_PHRASES,
};
use page_core::clock::FixedClock;
use page_core::config::PageConfig;
use page_core::evaluation::{
    aggregate_scores, corpus_stats, generate_report, kendall_w, rank_to_score, read_manifest, read_questionnaire_csv,
    read_rankings_file, score_questionnaire, Dimension, ManifestRow, QCondition, QDimension, ReportFormat,
    ReportInputs, Scale, TABLE_CONDITIONS,
};
use page_core::pipeline::{Pipeline, ProviderMode};
use page_core::profile::{
    summarize_profile, table_one_profile, ConversationStatus, DialogueEngine, DialogueTemplates, Major, Phase,
    StudentProfile, ValidationRules,
};
use page_core::providers::stub::StubLlm;
use page_core::providers::{Completion, CompletionRequest, EmbeddingVector, LlmProvider, ProviderError};
use page_core::retrieval::{
    chunk_document, deoverlapped_tokens, select_top_k, ChunkConfig, KbMeta, KnowledgeChunk, PersonalKnowledgeBase,
    KB_SCHEMA_VERSION,
};
use page_core::text::{word_count, word_tokens};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if let false = $cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn stub_pipeline(root: &std::path::Path) -> Result<Pipeline, String> {
    let cfg = PageConfig::load(&fixtures().join("page.json")).map_err(|e| e.to_string())?;
    Pipeline::open(cfg, root, ProviderMode::Stub).map_err(|e| e.to_string())
}

fn within(limit: Duration, started: Instant, detail: String) -> Outcome {
    let took = started.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(format!("{detail}; {took:.2?}"))
}

// 1. top-k against an exhaustive scan

fn oracle_cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let na: f64 = a.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingVector {
    loop {
        let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        if let Ok(n) = EmbeddingVector::new(v).and_then(|v| v.normalized()) {
            return n;
        }
    }
}

fn random_kb(rng: &mut ChaCha8Rng, size: usize, dim: usize) -> PersonalKnowledgeBase {
    let mut vectors: Vec<EmbeddingVector> = Vec::with_capacity(size);
    for i in 0..size {
        // about one in eight repeats an earlier vector so ties are exercised
        if i > 0 && rng.gen_ratio(1, 8) {
            let j = rng.gen_range(0..i);
            vectors.push(vectors[j].clone());
        } else {
            vectors.push(random_unit(rng, dim));
        }
    }
    let chunks = (0..size)
        .map(|i| KnowledgeChunk {
            chunk_id: format!("c{i:04}"),
            doc_id: "d".into(),
            text: format!("chunk {i}"),
            token_count: 2,
            overlap_tokens: 0,
        })
        .collect();
    let meta = KbMeta {
        schema_version: KB_SCHEMA_VERSION,
        kb_id: "kb".into(),
        profile_id: "p".into(),
        segment_set_id: "m".into(),
        embedding_provider: "random".into(),
        dimension: dim,
        count: size,
        created_at: FixedClock::at("2025-01-01T00:00:00Z").0,
    };
    PersonalKnowledgeBase::from_parts(meta, chunks, vectors).expect("consistent parts")
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (dim, k) = (256, 5);
    let mut max_err = 0f64;
    let mut tied = 0;
    for round in 0..200 {
        let size = if round == 0 { 1 } else if round == 1 { 1000 } else { rng.gen_range(1..=1000) };
        let kb = random_kb(&mut rng, size, dim);
        let query: Vec<f32> = if rng.gen_bool(0.3) {
            kb.vector(rng.gen_range(0..size)).to_vec()
        } else {
            random_unit(&mut rng, dim).into_values()
        };
        let mut scan: Vec<(usize, f64)> = (0..size).map(|i| (i, oracle_cosine(kb.vector(i), &query))).collect();
        scan.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scan.truncate(k);
        if scan.windows(2).any(|w| w[0].1 == w[1].1) {
            tied += 1;
        }
        let got = select_top_k(&kb, &query, k).map_err(|e| e.to_string())?;
        let got_idx: Vec<usize> = got.iter().map(|c| c.index).collect();
        let want_idx: Vec<usize> = scan.iter().map(|s| s.0).collect();
        ensure!(got_idx == want_idx, "KB {round} (size {size}): got {got_idx:?}, scan {want_idx:?}");
        for (g, w) in got.iter().zip(&scan) {
            max_err = max_err.max((g.similarity - w.1).abs());
            ensure!(g.chunk_id == format!("c{:04}", w.0), "KB {round}: chunk id {} for index {}", g.chunk_id, w.0);
        }
    }
    ensure!(max_err <= 1e-9, "similarity error {max_err:e} exceeds 1e-9");
    within(
        Duration::from_secs(30),
        started,
        format!("200 KBs exact, {tied} with tied top-5 scores, max similarity error {max_err:e}"),
    )
}

// 2. dialogue protocol

const TABLE_FIVE_STATUSES: [&str; 4] =
    ["in_progress", "summary_and_confirm", "completed_and_generate_profile", "aborted_without_profile"];

struct Script {
    name: &'static str,
    messages: &'static [&'static str],
    status: &'static str,
    phase: Phase,
}

const SCRIPTS: &[Script] = &[
    Script {
        name: "worked example",
        messages: &[
            "I'm a sophomore majoring in Computer Science and Technology",
            "I like to play games, mainly single-player RPGs with good plots.",
            "I'm currently playing 'Baldur's Gate 3,' and I feel the narrative and world-building are amazing.",
            "Nothing else to add.",
            "Yes",
        ],
        status: "completed_and_generate_profile",
        phase: Phase::Completed,
    },
    Script {
        name: "one interest, confirmed",
        messages: &["Sophomore, Computer Science", "I love dancing", "Mostly hip-hop with my friends", "That's all", "Yes"],
        status: "completed_and_generate_profile",
        phase: Phase::Completed,
    },
    Script {
        name: "two interests, confirmed",
        messages: &[
            "Senior, Biology",
            "I enjoy hiking",
            "Mostly mountain trails on weekends",
            "I also like cooking",
            "Italian food, especially fresh pasta",
            "That's all",
            "Yes",
        ],
        status: "completed_and_generate_profile",
        phase: Phase::Completed,
    },
    Script {
        name: "year only, then major",
        messages: &["I'm a junior", "Economics", "I like painting", "Watercolor landscapes mostly", "That's all", "Yes"],
        status: "completed_and_generate_profile",
        phase: Phase::Completed,
    },
    Script {
        name: "no major",
        messages: &["I have no major", "I love music", "I play jazz piano", "That's all", "Yes"],
        status: "completed_and_generate_profile",
        phase: Phase::Completed,
    },
    Script {
        name: "summary awaiting confirmation",
        messages: &["Freshman, History", "I like chess", "Mostly online blitz games", "That's all"],
        status: "summary_and_confirm",
        phase: Phase::SummaryConfirm,
    },
    Script {
        name: "exit offer shown",
        messages: &["Sophomore, Computer Science", "I love dancing", "Mostly hip-hop"],
        status: "in_progress",
        phase: Phase::ExitOffer,
    },
    Script {
        name: "interest follow-up pending",
        messages: &["Sophomore, Computer Science", "I love dancing"],
        status: "in_progress",
        phase: Phase::InterestDeepDive,
    },
    Script {
        name: "partial academic pending",
        messages: &["I'm a junior"],
        status: "in_progress",
        phase: Phase::AwaitAcademicPartial,
    },
    Script {
        name: "two-strike abort",
        messages: &["my major is loafing", "napping"],
        status: "aborted_without_profile",
        phase: Phase::Aborted,
    },
    Script {
        name: "two-strike abort on nonsense",
        messages: &["lol", "asdf"],
        status: "aborted_without_profile",
        phase: Phase::Aborted,
    },
    Script {
        name: "one strike, then recovery",
        messages: &["my major is loafing", "Sophomore, Computer Science", "I like chess", "Openings mostly", "That's all", "Yes"],
        status: "completed_and_generate_profile",
        phase: Phase::Completed,
    },
    Script {
        name: "safety abort during academic phase",
        messages: &["I want to hurt myself", "ok"],
        status: "aborted_without_profile",
        phase: Phase::Aborted,
    },
    Script {
        name: "safety abort during interests",
        messages: &["Senior, Biology", "I want to hurt myself", "fine"],
        status: "aborted_without_profile",
        phase: Phase::Aborted,
    },
];

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let llm = StubLlm::offline();
    let engine = DialogueEngine::new(
        DialogueTemplates::default(),
        ValidationRules::default(),
        Arc::new(FixedClock::at("2025-08-24T09:00:00Z")),
    );
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for script in SCRIPTS {
        let (mut state, opening) =
            engine.start_session_with_id(format!("s-{}", script.name), "Page").map_err(|e| e.to_string())?;
        ensure!(
            opening.starts_with("Hey there! I'm Page, your personalized learning partner."),
            "{}: opening {opening:?}",
            script.name
        );
        let mut offered = false;
        for msg in script.messages {
            let reply = engine.advance(&state, msg, &llm).map_err(|e| format!("{}: {e}", script.name))?;
            state = reply.state;
            // the exit button appears exactly when the exit question is asked
            if state.phase == Phase::ExitOffer {
                offered = true;
                ensure!(state.show_exit_button, "{}: exit offer without button", script.name);
            }
            ensure!(offered || !state.show_exit_button, "{}: button shown before the exit question", script.name);
        }
        let status = state.conversation_status.as_str();
        ensure!(TABLE_FIVE_STATUSES.contains(&status), "{}: unknown status {status}", script.name);
        ensure!(
            status == script.status && state.phase == script.phase,
            "{}: ended {status} / {:?}, expected {} / {:?}",
            script.name,
            state.phase,
            script.status,
            script.phase
        );
        if state.phase.is_terminal() {
            ensure!(engine.advance(&state, "hello", &llm).is_err(), "{}: terminal session accepted a turn", script.name);
        }
        *tally.entry(status).or_default() += 1;
    }
    ensure!(tally.len() == TABLE_FIVE_STATUSES.len(), "not every status reached: {tally:?}");
    within(Duration::from_secs(5), started, format!("{} transcripts, statuses {tally:?}", SCRIPTS.len()))
}

// 3. profile extraction on the worked example

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn criterion_3() -> Outcome {
    let llm = StubLlm::offline();
    let engine = DialogueEngine::new(
        DialogueTemplates::default(),
        ValidationRules::default(),
        Arc::new(FixedClock::at("2025-08-24T00:00:00Z")),
    );
    let (mut state, _) = engine.start_session_with_id("s-worked".into(), "Page").map_err(|e| e.to_string())?;
    for msg in SCRIPTS[0].messages {
        state = engine.advance(&state, msg, &llm).map_err(|e| e.to_string())?.state;
    }
    ensure!(
        state.conversation_status == ConversationStatus::CompletedAndGenerateProfile,
        "dialogue ended {:?}",
        state.conversation_status
    );
    let got = summarize_profile("student_001", &state.history, &llm).map_err(|e| e.to_string())?;
    let want: StudentProfile = table_one_profile();
    ensure!(got.year == want.year, "year {:?} != {:?}", got.year, want.year);
    ensure!(
        matches!((&got.major, &want.major), (Major::Named(a), Major::Named(b)) if normalize(a) == normalize(b)),
        "major {:?} != {:?}",
        got.major,
        want.major
    );
    ensure!(got.interests.len() == 1, "{} interests", got.interests.len());
    let (g, w) = (&got.interests[0], &want.interests[0]);
    for (field, a, b) in [
        ("domain", &g.domain, &w.domain),
        ("category", &g.category, &w.category),
        ("sub_category", &g.sub_category, &w.sub_category),
    ] {
        ensure!(normalize(a) == normalize(b), "{field}: {a:?} != {b:?}");
    }
    let keywords: Vec<String> = g.keywords.iter().map(|k| normalize(k)).collect();
    ensure!(keywords.contains(&normalize("Baldur's Gate 3")), "keywords {keywords:?}");
    for k in &w.keywords {
        ensure!(keywords.contains(&normalize(k)), "keyword {k:?} missing from {keywords:?}");
    }
    Ok(format!("{} / {} / {}; keywords {:?}", g.domain, g.category, g.sub_category, g.keywords))
}

// 4. adaptation fuzz

struct Scripted {
    outputs: Mutex<VecDeque<Completion>>,
}

impl LlmProvider for Scripted {
    fn id(&self) -> &str {
        "fuzz"
    }

    fn complete(&self, _request: &CompletionRequest) -> Result<Completion, ProviderError> {
        Ok(self.outputs.lock().unwrap().pop_front().unwrap_or_else(|| Completion::text("")))
    }
}

const BRIDGES: &[&str] = &[
    "To make this concrete, think of Baldur's Gate 3, where companions react to what you say and do.",
    "Picture a single-player RPG: the story reaches you through voice, text and images at once.",
    "Gamers meet this idea every time a cutscene mixes dialogue with on-screen subtitles.",
];

const NONE_VARIANTS: &[&str] =
    &["[None]", "[none]", "  [None]  \n", "\n[NONE]\n", "```\n[None]\n```", "\"[None]\"", "[None]."];

fn fuzz_output(rng: &mut ChaCha8Rng, original: &str) -> (&'static str, Completion) {
    let words: Vec<&str> = original.split_whitespace().collect();
    let with_bridge = |bridge: &str| match original.find(". ") {
        Some(i) => format!("{} {bridge} {}", original[..=i].trim_end(), &original[i + 2..]),
        None => format!("{original} {bridge}"),
    };
    match rng.gen_range(0..10) {
        0 | 1 => ("plausible", Completion::text(with_bridge(BRIDGES.choose(rng).unwrap()))),
        2 => ("none", Completion::text(*NONE_VARIANTS.choose(rng).unwrap())),
        3 => {
            let phrase = DEFAULT_NEUTRALITY_PHRASES.choose(rng).unwrap();
            ("neutrality", Completion::text(with_bridge(&format!("{phrase}, this part is easy."))))
        }
        4 => {
            let keep = rng.gen_range(1..words.len() * 3 / 4);
            ("too_short", Completion::text(words[..keep].join(" ")))
        }
        5 => {
            let copies = rng.gen_range(2..4);
            ("too_long", Completion::text(vec![original; copies].join(" ")))
        }
        6 => {
            let pool = BRIDGES.join(" ");
            let mut shuffled: Vec<&str> = pool.split_whitespace().collect();
            shuffled.shuffle(rng);
            shuffled.truncate(words.len());
            ("off_topic", Completion::text(shuffled.join(" ")))
        }
        7 => ("empty", Completion::text(if rng.gen_bool(0.5) { "" } else { "  \n\t " })),
        8 => ("safety_blocked", Completion::safety_blocked()),
        _ => ("trailing_none", Completion::text(format!("{} [None]", with_bridge(BRIDGES[0])))),
    }
}

fn criterion_4() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = stub_pipeline(dir.path())?;
    p.ingest_dir(&fixtures().join("course/tagi")).map_err(|e| e.to_string())?;
    let profile = table_one_profile();
    p.store().save_profile(&profile).map_err(|e| e.to_string())?;
    p.retrieve(&profile.student_id, "multimodality").map_err(|e| e.to_string())?;
    let kb = p.store().load_kb(&profile.student_id, "multimodality").map_err(|e| e.to_string())?;
    let module = p.load_module("multimodality").map_err(|e| e.to_string())?;
    let cfg: AdaptationConfig = p.config().adaptation.clone();
    let segments: Vec<_> =
        module.segments.iter().filter(|s| should_personalize(s, &cfg) == Selection::Adapt).collect();
    ensure!(!segments.is_empty(), "fixture module has no eligible segment");

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    let (mut adapted, mut original, mut violations) = (0, 0, Vec::new());
    let mut outputs = 0;
    while outputs < 1000 {
        let segment = segments.choose(&mut rng).unwrap();
        let mut queue = VecDeque::new();
        for _ in 0..=cfg.max_retries {
            let (kind, c) = fuzz_output(&mut rng, &segment.text);
            *kinds.entry(kind).or_default() += 1;
            queue.push_back(c);
            outputs += 1;
        }
        let llm = Scripted { outputs: Mutex::new(queue) };
        let result = personalize_segment(&profile, segment, &kb, &llm, p.providers().embedding.as_ref(), &cfg)
            .map_err(|e| e.to_string())?;
        let served = result.served_text(segment);
        if served.as_bytes() == segment.text.as_bytes() {
            original += 1;
            continue;
        }
        // anything else must be an adaptation that passes every check again
        let report = validate_adaptation(segment, served, &cfg);
        let ratio = word_count(served) as f64 / word_count(&segment.text) as f64;
        let ok = result.is_adapted()
            && report.passed
            && check_neutrality(served, &cfg.neutrality_phrases).is_empty()
            && (cfg.min_length_ratio..=cfg.max_length_ratio).contains(&ratio)
            && !served.to_ascii_lowercase().contains("[none]")
            && !served.trim().is_empty();
        if ok {
            adapted += 1;
        } else {
            violations.push(format!("{}: {served:?}", segment.segment_id));
        }
    }
    ensure!(violations.is_empty(), "{} violations, first {}", violations.len(), violations[0]);
    ensure!(adapted > 0 && original > 0, "degenerate fuzz: {adapted} adapted, {original} original");
    Ok(format!("{outputs} outputs {kinds:?}; 0 violations; served {adapted} adapted, {original} original"))
}

// 5. end-to-end determinism

fn personalize_once() -> Result<(Vec<u8>, Vec<u8>), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = stub_pipeline(dir.path())?;
    p.ingest_dir(&fixtures().join("course/tagi")).map_err(|e| e.to_string())?;
    let raw = std::fs::read_to_string(fixtures().join("profiles/student_001.json")).map_err(|e| e.to_string())?;
    let profile = StudentProfile::from_json(&raw).map_err(|e| e.to_string())?;
    p.store().save_profile(&profile).map_err(|e| e.to_string())?;
    p.personalize("student_001", "multimodality").map_err(|e| e.to_string())?;
    let read = |rel: &str| std::fs::read(dir.path().join(rel)).map_err(|e| format!("{rel}: {e}"));
    Ok((
        read("served/student_001/multimodality.txt")?,
        read("adaptations/student_001/multimodality.json")?,
    ))
}

fn criterion_5() -> Outcome {
    let runs: Vec<_> = (0..3).map(|_| personalize_once()).collect::<Result<_, _>>()?;
    ensure!(runs.iter().all(|r| *r == runs[0]), "runs differ");
    let golden = |rel: &str| std::fs::read(fixtures().join(rel)).map_err(|e| format!("{rel}: {e}"));
    ensure!(runs[0].0 == golden("golden/student_001/multimodality.txt")?, "served text differs from golden");
    ensure!(
        runs[0].1 == golden("golden/student_001/multimodality.adaptations.json")?,
        "adaptation record differs from golden"
    );
    Ok(format!("3 runs identical ({} + {} bytes), equal to golden", runs[0].0.len(), runs[0].1.len()))
}

// 6. evaluation arithmetic

fn ordering(s: &str) -> Vec<String> {
    s.split(',').map(str::to_string).collect()
}

fn criterion_6() -> Outcome {
    let w = |a: &str, b: &str| kendall_w(&[ordering(a), ordering(b)]).map_err(|e| e.to_string());
    let ws = [w("1,2,3,4,5", "1,2,3,4,5")?, w("1,2,3,4,5", "5,4,3,2,1")?, w("1,2,3,4,5", "2,1,3,4,5")?];
    ensure!(ws == [1.0, 0.0, 0.95], "W values {ws:?}");
    let scores: Vec<f64> = (1..=5).map(|r| rank_to_score(r, 5)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure!(scores == [100.0, 75.0, 50.0, 25.0, 0.0], "rank scores {scores:?}");

    let records = read_rankings_file(&fixtures().join("rankings/regression.csv")).map_err(|e| e.to_string())?;
    let table = aggregate_scores(&records, 0.8).map_err(|e| e.to_string())?;
    let conditions: Vec<&str> = table.rows.iter().map(|r| r.condition.as_str()).collect();
    ensure!(conditions == TABLE_CONDITIONS, "row order {conditions:?}");

    // each rank r of 5 is worth 25 * (5 - r); sums stay integral
    let mut sums: BTreeMap<(String, Dimension), (u64, u64)> = BTreeMap::new();
    for r in &records {
        for (pos, cond) in r.ordering.iter().enumerate() {
            let e = sums.entry((cond.clone(), r.dimension)).or_default();
            e.0 += 25 * (4 - pos as u64);
            e.1 += 1;
        }
    }
    for row in &table.rows {
        ensure!(row.scores.len() == 6, "{} has {} dimensions", row.condition, row.scores.len());
        for (dim, s) in &row.scores {
            let (sum, n) = sums[&(row.condition.clone(), *dim)];
            ensure!(s.mean == sum as f64 / n as f64, "{} {dim:?}: {} != {sum}/{n}", row.condition, s.mean);
        }
        let overall = row.scores.values().map(|s| s.mean).sum::<f64>() / 6.0;
        ensure!((row.overall - overall).abs() < 1e-12, "{} overall {} != {overall}", row.condition, row.overall);
    }

    let text = generate_report(ReportInputs { scores: Some(&table), ..ReportInputs::default() }, ReportFormat::Text);
    let header = text
        .lines()
        .find(|l| l.starts_with("Method"))
        .ok_or_else(|| "report has no Method header".to_string())?;
    let columns: Vec<&str> = header.split_whitespace().collect();
    ensure!(
        columns == ["Method", "Instr.", "Expre.", "Coher.", "Engag.", "Natur.", "Perso.", "Overall"],
        "header {columns:?}"
    );
    let page = &table.rows[4];
    Ok(format!("W {ws:?}; scores {scores:?}; PAGE overall {:.1}; {} groups flagged", page.overall, table.flagged))
}

// 7. questionnaire means

fn criterion_7() -> Outcome {
    let path = fixtures().join("questionnaire/table9.csv");
    let file = std::fs::File::open(&path).map_err(|e| e.to_string())?;
    let scale = Scale { min: 1, max: 5 };
    let responses = read_questionnaire_csv(file, "table9.csv", scale).map_err(|e| e.to_string())?;
    let summary = score_questionnaire(&responses, scale).map_err(|e| e.to_string())?;
    let mean = |c: QCondition, d: QDimension| format!("{:.2}", summary.means[&c][&d]);
    let mut misses = Vec::new();
    for (c, d, want) in [
        (QCondition::Standardized, QDimension::Con, "3.50"),
        (QCondition::Personalized, QDimension::Con, "4.35"),
        (QCondition::Standardized, QDimension::Dep, "3.20"),
        (QCondition::Personalized, QDimension::Dep, "4.35"),
    ] {
        let got = mean(c, d);
        if got != want {
            misses.push(format!("{} {} = {got}, expected {want}", c.as_str(), d.as_str()));
        }
    }
    let negative: Vec<_> = summary.deltas.iter().filter(|(_, v)| **v <= 0.0).map(|(d, _)| d.as_str()).collect();
    ensure!(summary.deltas.len() == 6, "{} deltas", summary.deltas.len());
    let deltas: Vec<String> = summary.deltas.iter().map(|(d, v)| format!("{}={v:+.2}", d.as_str())).collect();
    ensure!(negative.is_empty(), "non-positive deltas {negative:?}");
    ensure!(misses.is_empty(), "{}; deltas {}", misses.join("; "), deltas.join(" "));
    Ok(format!("{} responses; deltas {}", responses.len(), deltas.join(" ")))
}

// 8. corpus statistics

fn criterion_8() -> Outcome {
    let file = std::fs::File::open(fixtures().join("corpus/table4_manifest.csv")).map_err(|e| e.to_string())?;
    let rows = read_manifest(file, "table4_manifest.csv").map_err(|e| e.to_string())?;
    let stats = corpus_stats(&rows);
    let t = &stats.total;
    let total = (t.samples, t.words, t.queries, t.retrieved_docs);
    ensure!(total == (60, 17806, 489, 2573), "total {total:?}");
    let published = [
        ("TAGI", 20, 8138, 168, 699),
        ("HSU", 10, 2906, 80, 416),
        ("BIO", 10, 2189, 84, 499),
        ("PTMS", 10, 3007, 73, 460),
        ("PSY", 10, 1566, 84, 499),
    ];
    for (row, (course, s, w, q, d)) in stats.rows.iter().zip(published) {
        let got = (row.course.as_str(), row.samples, row.words, row.queries, row.retrieved_docs);
        ensure!(got == (course, s, w, q, d), "row {got:?}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let courses = ["A", "B", "C", "D", "E", "F"];
    for round in 0..100 {
        let n = rng.gen_range(0..200);
        let manifest: Vec<ManifestRow> = (0..n)
            .map(|i| ManifestRow {
                course: courses.choose(&mut rng).unwrap().to_string(),
                sample_id: format!("s{i}"),
                words: rng.gen_range(0..5000),
                queries: rng.gen_range(0..20),
                retrieved_docs: rng.gen_range(0..100),
            })
            .collect();
        let s = corpus_stats(&manifest);
        let direct = manifest.iter().fold((0u64, 0u64, 0u64, 0u64), |a, m| {
            (a.0 + 1, a.1 + m.words, a.2 + m.queries, a.3 + m.retrieved_docs)
        });
        let by_rows = s.rows.iter().fold((0u64, 0u64, 0u64, 0u64), |a, r| {
            (a.0 + r.samples, a.1 + r.words, a.2 + r.queries, a.3 + r.retrieved_docs)
        });
        let t = (s.total.samples, s.total.words, s.total.queries, s.total.retrieved_docs);
        ensure!(t == direct && t == by_rows, "manifest {round}: total {t:?}, rows {by_rows:?}, direct {direct:?}");
    }
    Ok("Total 60/17806/489/2573 and five course rows exact; 100 random manifests hold the identity".into())
}

// 9. chunk reconstruction

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let paragraphs = rng.gen_range(1..8);
    let mut out = Vec::new();
    for _ in 0..paragraphs {
        let sentences = rng.gen_range(1..12);
        let mut para = Vec::new();
        for _ in 0..sentences {
            let len = rng.gen_range(1..60);
            let words: Vec<String> = (0..len).map(|_| format!("w{}", rng.gen_range(0..500))).collect();
            para.push(format!("{}.", words.join(" ")));
        }
        out.push(para.join(if rng.gen_bool(0.2) { "\n" } else { " " }));
    }
    out.join("\n\n")
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total_chunks = 0;
    for round in 0..100 {
        let text = random_text(&mut rng);
        let target = rng.gen_range(10..300);
        let cfg = ChunkConfig { target_tokens: target, overlap_tokens: rng.gen_range(0..target) };
        let chunks = chunk_document("d", &text, cfg).map_err(|e| e.to_string())?;
        ensure!(deoverlapped_tokens(&chunks) == word_tokens(&text), "text {round} ({cfg:?}) does not reconstruct");
        ensure!(chunks.iter().all(|c| c.token_count <= target), "text {round}: chunk over target");
        total_chunks += chunks.len();
    }
    let text = (0..1000).map(|i| format!("t{i}")).collect::<Vec<_>>().join(" ");
    let cfg = ChunkConfig { target_tokens: 200, overlap_tokens: 40 };
    let chunks = chunk_document("d", &text, cfg).map_err(|e| e.to_string())?;
    let stride = cfg.target_tokens - cfg.overlap_tokens;
    let expected = 1 + (1000 - cfg.target_tokens).div_ceil(stride);
    ensure!(chunks.len() == expected, "1000 tokens gave {} chunks, stride oracle {expected}", chunks.len());
    ensure!(deoverlapped_tokens(&chunks) == word_tokens(&text), "1000-token text does not reconstruct");
    Ok(format!("100 texts ({total_chunks} chunks) reconstruct; 1000/200/40 gives {expected} chunks"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("top-k retrieval oracle", criterion_1),
        ("dialogue protocol", criterion_2),
        ("profile extraction", criterion_3),
        ("adaptation safety fuzz", criterion_4),
        ("end-to-end determinism", criterion_5),
        ("evaluation arithmetic", criterion_6),
        ("questionnaire statistics", criterion_7),
        ("corpus statistics", criterion_8),
        ("chunking reconstruction", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
