//! Shared helpers for integration tests: load a fixture directory into a
//! ready-to-run engine.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ragline_core::agents::TemplateSet;
use ragline_core::backend::{ChatBackend, ScriptedBackend};
use ragline_core::orchestrator::{Engine, EngineConfig};
use ragline_core::retrieval::{
    chunk_corpus, read_corpus_jsonl, Embedder, IndexRetriever, ScriptedEmbedder, VectorIndex,
};

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("fixtures")
        .join(name)
}

pub fn fixture_retriever(name: &str, embedder: Arc<dyn Embedder>) -> Arc<IndexRetriever> {
    let dir = fixture_dir(name);
    let docs = read_corpus_jsonl(dir.join("corpus.jsonl")).expect("fixture corpus");
    let chunks = chunk_corpus(docs, 100, 0).expect("fixture chunks");
    let index = VectorIndex::build(&chunks, embedder.as_ref()).expect("fixture index");
    Arc::new(IndexRetriever {
        index: Arc::new(index),
        embedder,
    })
}

pub fn fixture_backend(name: &str) -> Arc<ScriptedBackend> {
    Arc::new(ScriptedBackend::from_path(fixture_dir(name).join("script.jsonl")).expect("script"))
}

pub fn fixture_embedder(name: &str) -> Arc<ScriptedEmbedder> {
    Arc::new(
        ScriptedEmbedder::from_path(fixture_dir(name).join("embedder.json")).expect("embedder"),
    )
}

/// Engine wired to a fixture directory's scripted backend and embedder.
pub fn fixture_engine(name: &str, cfg: EngineConfig) -> Engine {
    let backend = fixture_backend(name);
    fixture_engine_with_backend(name, cfg, backend)
}

pub fn fixture_engine_with_backend(
    name: &str,
    cfg: EngineConfig,
    backend: Arc<dyn ChatBackend>,
) -> Engine {
    let embedder = fixture_embedder(name);
    let retriever = fixture_retriever(name, embedder);
    Engine::new(cfg, backend, retriever, Arc::new(TemplateSet::builtin())).expect("engine")
}
