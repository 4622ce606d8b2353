use crate::{Cli, Command, EvalCommand, GlobalArgs, ProfileCommand, Target};
use page_core::adaptation::Decision;
use page_core::config::PageConfig;
use page_core::evaluation::{
    aggregate_scores, assign_blind_pairs, corpus_stats, generate_report, kendall_w, read_manifest,
    read_questionnaire_csv, read_rankings_file, score_questionnaire, unblind, Assignment, CorpusStats,
    QuestionnaireResponse, RankingRecord, ReportFormat, ReportInputs, Scale, TABLE_CONDITIONS,
};
use page_core::pipeline::{Pipeline, ProviderMode};
use page_core::profile::{read_transcript, ProfileSummarizer, StudentProfile};
use page_core::{Error, ErrorCategory};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub fn run(cli: Cli) -> Result<(), Error> {
    let g = &cli.global;
    match cli.command {
        Command::Ingest { course_dir } => ingest(g, &course_dir),
        Command::Profile(cmd) => profile(g, cmd),
        Command::Retrieve(t) => retrieve(g, &t),
        Command::Personalize(t) => personalize(g, &t),
        Command::Eval(cmd) => eval(g, cmd),
        Command::Stats { manifest, format } => stats(g, manifest.as_deref(), &format),
        Command::Serve { bind } => serve(g, bind),
    }
}

fn load_config(g: &GlobalArgs) -> Result<PageConfig, Error> {
    match &g.config {
        Some(path) => Ok(PageConfig::load(path)?),
        None => Ok(PageConfig::default()),
    }
}

fn open(g: &GlobalArgs) -> Result<Pipeline, Error> {
    let mode = if g.live { ProviderMode::Live } else { ProviderMode::Stub };
    Pipeline::open(load_config(g)?, &g.storage, mode)
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::not_found(format!("{}: {e}", path.display())))
}

fn ingest(g: &GlobalArgs, dir: &Path) -> Result<(), Error> {
    let p = open(g)?;
    let summary = p.ingest_dir(dir)?;
    println!("course {}", summary.course_id);
    for (module, segments) in &summary.modules {
        println!("  module {module}: {segments} segments");
    }
    Ok(())
}

fn profile(g: &GlobalArgs, cmd: ProfileCommand) -> Result<(), Error> {
    let p = open(g)?;
    match cmd {
        ProfileCommand::Import {
            file,
            transcript,
            student_id,
        } => {
            let profile = if transcript {
                let f = File::open(&file).map_err(|e| Error::not_found(format!("{}: {e}", file.display())))?;
                let turns = read_transcript(BufReader::new(f))
                    .map_err(|e| Error::validation(format!("{}: {e}", file.display())))?;
                let cfg = p.config();
                let summarizer = ProfileSummarizer {
                    rules: cfg.dialogue.clone(),
                    ..ProfileSummarizer::default()
                };
                let id = student_id.unwrap_or_default();
                summarizer.summarize(&id, &turns, p.providers().llm.as_ref())?
            } else {
                StudentProfile::from_json(&read_file(&file)?)?
            };
            let path = p.store().save_profile(&profile)?;
            println!("profile {} saved to {}", profile.student_id, path.display());
        }
        ProfileCommand::Show { id } => {
            println!("{}", p.load_profile(&id)?.to_json());
        }
    }
    Ok(())
}

fn retrieve(g: &GlobalArgs, t: &Target) -> Result<(), Error> {
    let p = open(g)?;
    let record = p.retrieve(&t.profile, &t.module)?;
    println!("knowledge base {}", record.kb_id);
    println!("  queries: {}", record.queries.len());
    println!("  documents kept: {}", record.documents.len());
    println!("  documents dropped: {}", record.dropped_documents);
    println!("  chunks: {}", record.chunk_count);
    for w in &record.warnings {
        println!("  warning: {}: {}", w.query_id, w.message);
    }
    Ok(())
}

fn personalize(g: &GlobalArgs, t: &Target) -> Result<(), Error> {
    let p = open(g)?;
    let result = p.personalize(&t.profile, &t.module)?;
    println!(
        "module {} for {}: {} of {} segments adapted",
        result.module_id,
        result.profile_id,
        result.adapted_count(),
        result.results.len()
    );
    for r in &result.results {
        match &r.decision {
            Decision::Adapted => println!("  {}: adapted", r.segment_id),
            Decision::Skip { reason } => println!("  {}: skipped ({reason})", r.segment_id),
        }
    }
    println!("served: {}", p.served_text_path(&t.profile, &t.module)?.display());
    Ok(())
}

fn eval(g: &GlobalArgs, cmd: EvalCommand) -> Result<(), Error> {
    let cfg = load_config(g)?;
    let ev = &cfg.evaluation;
    match cmd {
        EvalCommand::Assign {
            items,
            experts,
            conditions,
            reviews,
            seed,
        } => {
            let item_ids: Vec<String> = read_file(&items)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect();
            let conditions = if conditions.is_empty() {
                TABLE_CONDITIONS.iter().map(|c| c.to_string()).collect()
            } else {
                conditions
            };
            let assignments = assign_blind_pairs(
                &item_ids,
                &experts,
                &conditions,
                reviews.unwrap_or(ev.reviews_per_item),
                seed.unwrap_or(ev.seed),
            )?;
            let p = open(g)?;
            p.store().put(&["eval"], "assignments", "assignments", &assignments)?;
            println!("{}", serde_json::to_string_pretty(&assignments).expect("assignments serialize"));
        }
        EvalCommand::Score { rankings, assignments } => {
            let mut records = read_rankings_file(&rankings)?;
            if let Some(path) = assignments {
                let raw = read_file(&path)?;
                let a: Vec<Assignment> = serde_json::from_str(&raw)
                    .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
                records = unblind(&records, &a)?;
            }
            let table = aggregate_scores(&records, ev.agreement_threshold)?;
            let p = open(g)?;
            p.store().put(&["eval"], "scores", "scores", &table)?;
            print!(
                "{}",
                generate_report(
                    ReportInputs {
                        scores: Some(&table),
                        ..ReportInputs::default()
                    },
                    ReportFormat::Text
                )
            );
        }
        EvalCommand::Agreement { files } => agreement(&files)?,
        EvalCommand::Report {
            rankings,
            questionnaire,
            manifest,
            format,
        } => {
            let format: ReportFormat = format.parse()?;
            let p = open(g)?;
            let scale = Scale {
                min: ev.scale_min,
                max: ev.scale_max,
            };
            let records: Vec<RankingRecord> = match rankings {
                Some(path) => read_rankings_file(&path)?,
                None => p.store().read_lines(&["eval"], "rankings")?,
            };
            let responses: Vec<QuestionnaireResponse> = match questionnaire {
                Some(path) => {
                    let f = File::open(&path).map_err(|e| Error::not_found(format!("{}: {e}", path.display())))?;
                    read_questionnaire_csv(f, &path.display().to_string(), scale)?
                }
                None => p.store().read_lines(&["eval"], "questionnaire")?,
            };
            let corpus = corpus_from(&p, manifest.as_deref())?;
            let scores = match records.is_empty() {
                true => None,
                false => Some(aggregate_scores(&records, ev.agreement_threshold)?),
            };
            let summary = match responses.is_empty() {
                true => None,
                false => Some(score_questionnaire(&responses, scale)?),
            };
            let out = generate_report(
                ReportInputs {
                    scores: scores.as_ref(),
                    questionnaire: summary.as_ref(),
                    corpus: corpus.as_ref(),
                },
                format,
            );
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

/// One file: experts are the judges of each item and dimension. Several
/// files: each file is one judge of every (item, expert, dimension) record.
fn agreement(files: &[std::path::PathBuf]) -> Result<(), Error> {
    let mut groups: BTreeMap<Vec<String>, Vec<Vec<String>>> = BTreeMap::new();
    let single = files.len() == 1;
    for file in files {
        let mut seen = BTreeMap::new();
        for r in read_rankings_file(file)? {
            let mut key = vec![r.item_id.clone(), r.dimension.short().to_string()];
            if !single {
                key.push(r.expert_id.clone());
                if seen.insert(key.clone(), ()).is_some() {
                    return Err(Error::validation(format!(
                        "{}: duplicate ranking for {}",
                        file.display(),
                        key.join(" ")
                    )));
                }
            }
            groups.entry(key).or_default().push(r.ordering);
        }
    }
    let mut ws = Vec::new();
    for (key, orderings) in &groups {
        if orderings.len() < 2 {
            continue;
        }
        let w = kendall_w(orderings)?;
        println!("{}\tW={w:.3}", key.join("\t"));
        ws.push(w);
    }
    if ws.is_empty() {
        return Err(Error::validation("no group has two or more judges"));
    }
    let mean = ws.iter().sum::<f64>() / ws.len() as f64;
    println!("mean W over {} groups: {mean:.3}", ws.len());
    Ok(())
}

fn corpus_from(p: &Pipeline, manifest: Option<&Path>) -> Result<Option<CorpusStats>, Error> {
    let rows = match manifest {
        Some(path) => {
            let f = File::open(path).map_err(|e| Error::not_found(format!("{}: {e}", path.display())))?;
            read_manifest(f, &path.display().to_string())?
        }
        None => p.corpus_manifest()?,
    };
    Ok((!rows.is_empty()).then(|| corpus_stats(&rows)))
}

fn stats(g: &GlobalArgs, manifest: Option<&Path>, format: &str) -> Result<(), Error> {
    let format: ReportFormat = format.parse()?;
    let p = open(g)?;
    let corpus = corpus_from(&p, manifest)?;
    let corpus = corpus.unwrap_or_else(|| corpus_stats(&[]));
    let out = generate_report(
        ReportInputs {
            corpus: Some(&corpus),
            ..ReportInputs::default()
        },
        format,
    );
    print!("{out}");
    if !out.ends_with('\n') {
        println!();
    }
    Ok(())
}

fn serve(g: &GlobalArgs, bind: Option<String>) -> Result<(), Error> {
    let p = open(g)?;
    let api_key = match &p.config().server.api_key_env {
        Some(var) => Some(std::env::var(var).map_err(|_| {
            Error::config(format!("server.api_key_env names {var}, which is not set"))
        })?),
        None => None,
    };
    let bind = bind.unwrap_or_else(|| p.config().server.bind.clone());
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::new(ErrorCategory::Internal, e.to_string()))?;
    runtime.block_on(async move {
        let state = page_server::AppState::new(p, api_key);
        page_server::serve(state, &bind)
            .await
            .map_err(|e| Error::new(ErrorCategory::Internal, format!("{bind}: {e}")))
    })
}
