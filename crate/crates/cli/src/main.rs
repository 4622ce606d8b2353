mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Personalized educational content generation: ingest courses, build
/// per-student knowledge bases, adapt content and evaluate the results.
#[derive(Debug, Parser)]
#[command(name = "page", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON configuration file (defaults apply when omitted)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Storage root for all artifacts
    #[arg(long, global = true, value_name = "DIR", default_value = "page-data")]
    pub storage: PathBuf,
    /// Use the configured HTTP providers instead of the offline stubs
    #[arg(long, global = true)]
    pub live: bool,
    /// Increase log verbosity (-v info, -vv debug, -vvv trace)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a course directory (one text file per module)
    Ingest {
        /// Directory holding the module files and an optional course.json
        course_dir: PathBuf,
    },
    /// Import or show student profiles
    #[command(subcommand)]
    Profile(ProfileCommand),
    /// Generate queries, search, and build the knowledge base for one module
    Retrieve(Target),
    /// Adapt one module for one student and write the served module
    Personalize(Target),
    /// Expert evaluation and questionnaire tools
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Print dataset statistics per course
    Stats {
        /// Manifest CSV (course,sample_id,words,queries,retrieved_docs); defaults to stored retrieval records
        #[arg(long, value_name = "FILE")]
        manifest: Option<PathBuf>,
        /// Output format: text or json
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Run the HTTP API
    Serve {
        /// Address to bind; overrides server.bind from the configuration
        #[arg(long, value_name = "ADDR")]
        bind: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Target {
    /// Student profile id
    #[arg(long, value_name = "ID")]
    pub profile: String,
    /// Module id
    #[arg(long, value_name = "ID")]
    pub module: String,
}

#[derive(Debug, Subcommand)]
pub enum ProfileCommand {
    /// Import a profile document, or summarize a dialogue transcript into one
    Import {
        /// Profile JSON document, or a JSON Lines transcript with --transcript
        file: PathBuf,
        /// Treat FILE as a transcript and summarize it
        #[arg(long)]
        transcript: bool,
        /// Student id for a summarized transcript
        #[arg(long, value_name = "ID", required_if_eq("transcript", "true"))]
        student_id: Option<String>,
    },
    /// Print a stored profile
    Show {
        /// Student profile id
        id: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Assign blinded items to experts
    Assign {
        /// File with one item id per line
        #[arg(long, value_name = "FILE")]
        items: PathBuf,
        /// Comma-separated expert ids
        #[arg(long, value_delimiter = ',', required = true)]
        experts: Vec<String>,
        /// Comma-separated condition labels (defaults to the five compared methods)
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<String>,
        /// Experts per item (defaults to evaluation.reviews_per_item)
        #[arg(long)]
        reviews: Option<usize>,
        /// Shuffle seed (defaults to evaluation.seed)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Convert rankings to 0-100 scores per method and dimension
    Score {
        /// Rankings file (.csv or .json)
        rankings: PathBuf,
        /// Assignment file from `eval assign`; rankings then use blind codes
        #[arg(long, value_name = "FILE")]
        assignments: Option<PathBuf>,
    },
    /// Kendall's W; one file compares its experts, several files compare each other
    Agreement {
        /// Rankings files (.csv or .json)
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Render the evaluation report
    Report {
        /// Rankings file; defaults to stored rankings
        #[arg(long, value_name = "FILE")]
        rankings: Option<PathBuf>,
        /// Questionnaire CSV; defaults to stored responses
        #[arg(long, value_name = "FILE")]
        questionnaire: Option<PathBuf>,
        /// Corpus manifest CSV; defaults to stored retrieval records
        #[arg(long, value_name = "FILE")]
        manifest: Option<PathBuf>,
        /// Output format: json or text
        #[arg(long, default_value = "text")]
        format: String,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_env("PAGE_LOG")
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(level));
    let _ = tracing_subscriber::fmt()
        .json()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(page_core::ErrorCategory::Validation.exit_code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.global.verbose);
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
