//! Config file + flag merging.
//!
//! The config file is TOML with sections named after the engine's parts.
//! Precedence for every engine field is: CLI flag > config file > built-in
//! default. Exactly one backend and one embedder survive the merge; flags
//! win there too.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use ragline_core::backend::{
    BackoffConfig, ChatBackend, RecordBackend, RemoteBackend, RemoteConfig, ReplayBackend,
    ScriptedBackend,
};
use ragline_core::orchestrator::EngineConfig;
use ragline_core::retrieval::{Embedder, HashEmbedder, RemoteEmbedder, ScriptedEmbedder};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub orchestrator: OrchestratorSection,
    #[serde(default)]
    pub llm_backend: LlmSection,
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrchestratorSection {
    pub k: Option<usize>,
    pub max_plan_steps: Option<usize>,
    pub planner_enabled: Option<bool>,
    pub extractor_enabled: Option<bool>,
    pub max_parse_repairs: Option<u32>,
    pub max_replans: Option<u32>,
    pub min_rating: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSection {
    /// `remote`, `scripted:<file>`, or `replay:<cassette>`.
    pub backend: Option<String>,
    pub remote_url: Option<String>,
    pub model: Option<String>,
    pub api_key_env: Option<String>,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub timeout_ms: Option<u64>,
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSection {
    /// `remote`, `test`, or `scripted:<file>`.
    pub embedder: Option<String>,
    pub index: Option<String>,
    pub test_dim: Option<usize>,
    pub remote_url: Option<String>,
    pub embed_model: Option<String>,
    pub embed_dim: Option<usize>,
    pub api_key_env: Option<String>,
    pub chunk_words: Option<usize>,
    pub overlap_words: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub parallelism: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Engine-level flags shared by `ask` and `eval`.
#[derive(Debug, Default, Args)]
pub struct EngineFlags {
    /// Passages retrieved per search step.
    #[arg(long)]
    pub k: Option<usize>,

    /// Upper bound on plan length; longer plans are truncated.
    #[arg(long)]
    pub max_plan_steps: Option<usize>,

    /// Skip planning and answer in a single retrieval round.
    #[arg(long)]
    pub no_planner: bool,

    /// Feed raw retrieved chunks to the answer stage instead of notes.
    #[arg(long)]
    pub no_extractor: bool,

    /// Re-prompts allowed when structured output fails to parse.
    #[arg(long)]
    pub max_parse_repairs: Option<u32>,

    /// Extra plan attempts when a run ends with an empty answer.
    #[arg(long)]
    pub max_replans: Option<u32>,

    /// Treat step answers rated below this as unsuccessful.
    #[arg(long)]
    pub min_rating: Option<i64>,

    /// Sampling temperature for model calls.
    #[arg(long)]
    pub temperature: Option<f64>,

    /// Completion token cap for model calls.
    #[arg(long)]
    pub max_tokens: Option<u32>,

    /// Model id sent to the backend.
    #[arg(long)]
    pub model: Option<String>,
}

/// Flag > file > default, for every engine field.
pub fn resolve_engine_config(file: &FileConfig, flags: &EngineFlags) -> EngineConfig {
    let d = EngineConfig::default();
    let o = &file.orchestrator;
    let l = &file.llm_backend;
    EngineConfig {
        k: flags.k.or(o.k).unwrap_or(d.k),
        max_plan_steps: flags.max_plan_steps.or(o.max_plan_steps).unwrap_or(d.max_plan_steps),
        planner_enabled: if flags.no_planner {
            false
        } else {
            o.planner_enabled.unwrap_or(d.planner_enabled)
        },
        extractor_enabled: if flags.no_extractor {
            false
        } else {
            o.extractor_enabled.unwrap_or(d.extractor_enabled)
        },
        max_parse_repairs: flags
            .max_parse_repairs
            .or(o.max_parse_repairs)
            .unwrap_or(d.max_parse_repairs),
        max_replans: flags.max_replans.or(o.max_replans).unwrap_or(d.max_replans),
        min_rating: flags.min_rating.or(o.min_rating),
        temperature: flags.temperature.or(l.temperature).unwrap_or(d.temperature),
        max_tokens: flags.max_tokens.or(l.max_tokens).unwrap_or(d.max_tokens),
        model_id: flags
            .model
            .clone()
            .or_else(|| l.model.clone())
            .unwrap_or(d.model_id),
    }
}

fn api_key_from(section_env: &Option<String>) -> Option<String> {
    let var = section_env.as_deref().unwrap_or("OPENAI_API_KEY");
    std::env::var(var).ok()
}

/// Build the chat backend from its selector string, wrapping it in a
/// recorder when `record` names a cassette path.
pub fn make_backend(
    selector: Option<&str>,
    file: &FileConfig,
    record: Option<&Path>,
) -> Result<Arc<dyn ChatBackend>> {
    let selector = selector
        .map(str::to_string)
        .or_else(|| file.llm_backend.backend.clone())
        .unwrap_or_else(|| "remote".to_string());
    let base: Arc<dyn ChatBackend> = if selector == "remote" {
        let l = &file.llm_backend;
        let url = l
            .remote_url
            .clone()
            .context("remote backend needs llm_backend.remote_url")?;
        let mut cfg = RemoteConfig::new(url, l.model.clone().unwrap_or_else(|| "default".into()));
        cfg.api_key = api_key_from(&l.api_key_env);
        if let Some(t) = l.timeout_ms {
            cfg.timeout_ms = t;
        }
        if let Some(m) = l.max_in_flight {
            cfg.max_in_flight = m;
        }
        cfg.backoff = BackoffConfig::default();
        Arc::new(RemoteBackend::new(cfg)?)
    } else if let Some(path) = selector.strip_prefix("scripted:") {
        Arc::new(ScriptedBackend::from_path(path).context("loading scripted backend")?)
    } else if let Some(path) = selector.strip_prefix("replay:") {
        Arc::new(ReplayBackend::from_path(path).context("loading replay cassette")?)
    } else {
        bail!("unknown backend {selector:?} (expected remote, scripted:<file>, replay:<file>)");
    };
    match record {
        Some(path) => Ok(Arc::new(RecordBackend::new(base, path)?)),
        None => Ok(base),
    }
}

/// Build the embedder from its selector string.
pub fn make_embedder(selector: Option<&str>, file: &FileConfig) -> Result<Arc<dyn Embedder>> {
    let selector = selector
        .map(str::to_string)
        .or_else(|| file.retrieval.embedder.clone())
        .unwrap_or_else(|| "test".to_string());
    if selector == "test" {
        let dim = file.retrieval.test_dim.unwrap_or(HashEmbedder::DEFAULT_DIM);
        Ok(Arc::new(HashEmbedder::new(dim)))
    } else if selector == "remote" {
        let r = &file.retrieval;
        let url = r
            .remote_url
            .clone()
            .context("remote embedder needs retrieval.remote_url")?;
        let model = r.embed_model.clone().unwrap_or_else(|| "default".into());
        let dim = r.embed_dim.context("remote embedder needs retrieval.embed_dim")?;
        Ok(Arc::new(RemoteEmbedder::new(
            url,
            model,
            dim,
            api_key_from(&r.api_key_env),
            file.llm_backend.timeout_ms.unwrap_or(60_000),
        )?))
    } else if let Some(path) = selector.strip_prefix("scripted:") {
        Ok(Arc::new(
            ScriptedEmbedder::from_path(path).context("loading scripted embedder")?,
        ))
    } else {
        bail!("unknown embedder {selector:?} (expected remote, test, scripted:<file>)");
    }
}

pub fn resolve_index_path(flag: Option<&PathBuf>, file: &FileConfig) -> Result<PathBuf> {
    flag.cloned()
        .or_else(|| file.retrieval.index.clone().map(PathBuf::from))
        .context("no index given (use --index or retrieval.index in the config file)")
}
