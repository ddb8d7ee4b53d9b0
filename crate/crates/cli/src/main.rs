//! `ragline` — operator surface for the plan-driven RAG engine.
//!
//! Exit codes: 0 answered/passed, 1 usage or config error, 2 runtime abort
//! or replay mismatch, 3 completed without producing an answer.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::EngineFlags;

#[derive(Parser)]
#[command(name = "ragline", version, about = "Plan-driven retrieval-augmented question answering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chunk a JSONL corpus, embed it, and write a vector index.
    Index(IndexArgs),
    /// Answer one question and write the run transcript.
    Ask(AskArgs),
    /// Run a benchmark dataset and write a report.
    Eval(EvalArgs),
    /// Re-execute a transcript and verify it regenerates identically.
    Replay(ReplayArgs),
}

#[derive(clap::Args)]
pub struct IndexArgs {
    /// Corpus file: JSON Lines of {id, title, text}.
    #[arg(long)]
    pub corpus: PathBuf,

    /// Output index path.
    #[arg(long)]
    pub out: PathBuf,

    /// Words per chunk window.
    #[arg(long)]
    pub chunk_words: Option<usize>,

    /// Overlapping words between consecutive windows.
    #[arg(long)]
    pub overlap_words: Option<usize>,

    /// Embedder: remote, test, or scripted:<file>.
    #[arg(long)]
    pub embedder: Option<String>,

    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct AskArgs {
    /// The question to answer.
    pub question: String,

    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Backend: remote, scripted:<file>, or replay:<cassette>.
    #[arg(long)]
    pub backend: Option<String>,

    /// Embedder: remote, test, or scripted:<file>.
    #[arg(long)]
    pub embedder: Option<String>,

    /// Vector index to search.
    #[arg(long)]
    pub index: Option<PathBuf>,

    /// Record every model call into this cassette.
    #[arg(long)]
    pub record: Option<PathBuf>,

    /// Directory of prompt template files overriding the built-ins.
    #[arg(long)]
    pub prompts: Option<PathBuf>,

    /// Where to write the run transcript.
    #[arg(long, default_value = "transcript.json")]
    pub transcript: PathBuf,

    /// Also write agent calls as JSON Lines to this path.
    #[arg(long)]
    pub call_log: Option<PathBuf>,

    /// Print the transcript JSON instead of the human summary.
    #[arg(long)]
    pub json: bool,

    #[command(flatten)]
    pub engine: EngineFlags,
}

#[derive(clap::Args)]
pub struct EvalArgs {
    /// Dataset file: JSON Lines of {id, question|claim, answers}.
    #[arg(long)]
    pub dataset: PathBuf,

    /// Metric: em or acc.
    #[arg(long, default_value = "em")]
    pub metric: String,

    /// Where to write the JSON report (a CSV sibling is written too).
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,

    /// Concurrent engine runs.
    #[arg(long)]
    pub parallelism: Option<usize>,

    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub backend: Option<String>,

    #[arg(long)]
    pub embedder: Option<String>,

    #[arg(long)]
    pub index: Option<PathBuf>,

    #[arg(long)]
    pub record: Option<PathBuf>,

    #[arg(long)]
    pub prompts: Option<PathBuf>,

    #[command(flatten)]
    pub engine: EngineFlags,
}

#[derive(clap::Args)]
pub struct ReplayArgs {
    /// Transcript to re-execute and verify.
    pub transcript: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let result = match &cli.command {
        Command::Index(args) => commands::cmd_index(args),
        Command::Ask(args) => commands::cmd_ask(args),
        Command::Eval(args) => commands::cmd_eval(args),
        Command::Replay(args) => commands::cmd_replay(args),
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
