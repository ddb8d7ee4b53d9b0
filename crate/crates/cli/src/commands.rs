//! The four subcommands. Each returns the process exit code:
//! 0 answered/passed, 1 usage or config error (via `Err`), 2 runtime abort
//! or replay mismatch, 3 completed without an answer.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use ragline_core::agents::TemplateSet;
use ragline_core::eval::{load_dataset_jsonl, run_benchmark, Metric};
use ragline_core::orchestrator::{Engine, EngineConfig, RunOutcome, RunTranscript};
use ragline_core::retrieval::{
    chunk_corpus, read_corpus_jsonl, Embedder, IndexRetriever, VectorIndex,
};
use ragline_core::state::TaskType;

use crate::config::{
    make_backend, make_embedder, resolve_engine_config, resolve_index_path, EngineFlags,
    FileConfig,
};
use crate::{AskArgs, EvalArgs, IndexArgs, ReplayArgs};

fn load_file_config(path: Option<&PathBuf>) -> Result<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn templates(dir: Option<&PathBuf>) -> Result<Arc<TemplateSet>> {
    Ok(Arc::new(match dir {
        Some(d) => TemplateSet::from_dir(d).context("loading prompt templates")?,
        None => TemplateSet::builtin(),
    }))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .and_then(|_| std::fs::rename(&tmp, path))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn cmd_index(args: &IndexArgs) -> Result<u8> {
    let file = load_file_config(args.config.as_ref())?;
    let embedder = make_embedder(args.embedder.as_deref(), &file)?;
    let chunk_words = args
        .chunk_words
        .or(file.retrieval.chunk_words)
        .unwrap_or(100);
    let overlap = args
        .overlap_words
        .or(file.retrieval.overlap_words)
        .unwrap_or(0);
    let docs = read_corpus_jsonl(&args.corpus)
        .with_context(|| format!("reading corpus {}", args.corpus.display()))?;
    let chunks = chunk_corpus(docs, chunk_words, overlap)?;
    let index = VectorIndex::build(&chunks, embedder.as_ref())?;
    // Write-then-rename so a crashed build cannot corrupt an existing index.
    let tmp = args.out.with_extension("tmp");
    index.save(&tmp)?;
    std::fs::rename(&tmp, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let bytes = std::fs::metadata(&args.out)?.len();
    println!(
        "indexed {} chunks (dim {}, {} bytes) -> {}",
        index.len(),
        index.dim(),
        bytes,
        args.out.display()
    );
    println!("corpus sha256: {}", index.corpus_sha256_hex());
    println!("embedder: {}", index.embedder_id());
    Ok(0)
}

fn build_engine(
    config_path: Option<&PathBuf>,
    flags: &EngineFlags,
    backend_flag: Option<&str>,
    embedder_flag: Option<&str>,
    index_flag: Option<&PathBuf>,
    record: Option<&PathBuf>,
    prompts: Option<&PathBuf>,
) -> Result<Engine> {
    let file = load_file_config(config_path)?;
    let cfg: EngineConfig = resolve_engine_config(&file, flags);
    cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    let backend = make_backend(backend_flag, &file, record.map(|p| p.as_path()))?;
    let embedder: Arc<dyn Embedder> = make_embedder(embedder_flag, &file)?;
    let index_path = resolve_index_path(index_flag, &file)?;
    let index = VectorIndex::load(&index_path)
        .with_context(|| format!("loading index {}", index_path.display()))?;
    if index.embedder_id() != embedder.id() {
        bail!(
            "index {} was built with embedder {:?} but {:?} is configured",
            index_path.display(),
            index.embedder_id(),
            embedder.id()
        );
    }
    let retriever = Arc::new(IndexRetriever {
        index: Arc::new(index),
        embedder,
    });
    Engine::new(cfg, backend, retriever, templates(prompts)?).map_err(|e| anyhow::anyhow!("{e}"))
}

fn print_human_summary(t: &RunTranscript) {
    println!(
        "plan: {}",
        serde_json::to_string(&t.graph_state.plan).unwrap_or_default()
    );
    if let Some(exec) = t.graph_state.past_exp.last() {
        for i in 0..exec.completed_steps() {
            let task = &exec.step_question[i];
            let kind = match task.task_type {
                TaskType::Search => "search",
                TaskType::Aggregate => "aggregate",
            };
            println!("step {} [{kind}]: {}", i + 1, task.task);
            let out = &exec.step_output[i];
            let mark = if out.success { "answer" } else { "no answer" };
            println!("  {}: {}", mark, out.answer);
        }
    }
    match t.outcome() {
        RunOutcome::Answered => println!("final answer: {}", t.graph_state.final_answer),
        RunOutcome::Unanswered => println!("final answer: (none)"),
        RunOutcome::Aborted => println!(
            "run aborted: {}",
            t.abort_reason.as_deref().unwrap_or("unknown reason")
        ),
    }
}

pub fn cmd_ask(args: &AskArgs) -> Result<u8> {
    let engine = build_engine(
        args.config.as_ref(),
        &args.engine,
        args.backend.as_deref(),
        args.embedder.as_deref(),
        args.index.as_ref(),
        args.record.as_ref(),
        args.prompts.as_ref(),
    )?;
    let transcript = engine
        .run(&args.question)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    transcript
        .save(&args.transcript)
        .with_context(|| format!("writing transcript {}", args.transcript.display()))?;
    if let Some(path) = &args.call_log {
        let mut lines = String::new();
        for call in &transcript.agent_calls {
            lines.push_str(&serde_json::to_string(call)?);
            lines.push('\n');
        }
        write_atomic(path, &lines)?;
    }
    if args.json {
        print!("{}", transcript.to_json_pretty());
    } else {
        print_human_summary(&transcript);
        println!("transcript: {}", args.transcript.display());
    }
    Ok(match transcript.outcome() {
        RunOutcome::Answered => 0,
        RunOutcome::Aborted => 2,
        RunOutcome::Unanswered => 3,
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<u8> {
    let engine = build_engine(
        args.config.as_ref(),
        &args.engine,
        args.backend.as_deref(),
        args.embedder.as_deref(),
        args.index.as_ref(),
        args.record.as_ref(),
        args.prompts.as_ref(),
    )?;
    let examples = load_dataset_jsonl(&args.dataset)
        .with_context(|| format!("reading dataset {}", args.dataset.display()))?;
    let metric: Metric = args.metric.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let file = load_file_config(args.config.as_ref())?;
    let parallelism = args
        .parallelism
        .or(file.eval.parallelism)
        .unwrap_or(4);
    let dataset_name = args
        .dataset
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "dataset".to_string());
    let report = run_benchmark(&examples, &engine, metric, parallelism, &dataset_name)?;
    write_atomic(&args.out, &report.to_json_pretty())?;
    write_atomic(&args.out.with_extension("csv"), &report.to_csv())?;
    print!("{}", report.to_table());
    Ok(0)
}

pub fn cmd_replay(args: &ReplayArgs) -> Result<u8> {
    let stored = RunTranscript::load(&args.transcript)
        .with_context(|| format!("reading transcript {}", args.transcript.display()))?;

    let mut all_pass = true;
    let mut check = |name: &str, ok: bool| {
        println!("{} {}", if ok { "PASS" } else { "FAIL" }, name);
        all_pass &= ok;
    };

    check(
        "config_sha256",
        stored.config.sha256() == stored.config_sha256,
    );

    let backend = Arc::new(stored.to_replay_backend());
    let retriever = Arc::new(stored.to_replay_retriever());
    let engine = Engine::new(
        stored.config.clone(),
        backend,
        retriever,
        Arc::new(TemplateSet::builtin()),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let regenerated = engine
        .run(&stored.question)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let a = &stored.graph_state;
    let b = &regenerated.graph_state;
    check("original_question", a.original_question == b.original_question);
    check("plan", a.plan == b.plan);
    check("past_exp", a.past_exp == b.past_exp);
    check("final_answer", a.final_answer == b.final_answer);

    if !all_pass {
        if let Some(reason) = &regenerated.abort_reason {
            println!("replay run aborted: {reason}");
        }
        return Ok(2);
    }
    Ok(0)
}
