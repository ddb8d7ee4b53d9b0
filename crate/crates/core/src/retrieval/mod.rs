//! Dense retrieval: chunking, embedding, flat index, top-k search.

mod chunk;
mod embed;
mod index;

pub use chunk::{chunk_corpus, read_corpus_jsonl, source_doc_id, Chunk, RawDoc};
pub use embed::{
    embed_normalized, Embedder, EmbeddingVector, HashEmbedder, RemoteEmbedder, ScriptedEmbedder,
};
pub use index::{ChunkMeta, SearchHit, VectorIndex};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("chunk_words {chunk_words} must exceed overlap_words {overlap_words}")]
    BadChunking {
        chunk_words: usize,
        overlap_words: usize,
    },
    #[error("corpus line {line}: {detail}")]
    Corpus { line: usize, detail: String },
    #[error("vector norm {norm} cannot be normalized")]
    Normalization { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("index built with embedder {index:?} but queried with {query:?}")]
    EmbedderMismatch { index: String, query: String },
    #[error("embedder protocol: {0}")]
    EmbedderProtocol(String),
    #[error("index build: {0}")]
    Build(String),
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error("{0}")]
    EmptyInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One retrieval result with the passage attached, as the orchestrator
/// consumes it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RetrievedPassage {
    pub chunk_id: String,
    pub score: f32,
    pub rank: usize,
    pub title: String,
    pub text: String,
}

/// What the orchestrator needs from retrieval: text in, ranked passages out.
/// Implemented by the live index and by transcript playback.
pub trait Retriever: Send + Sync {
    fn search(&self, query: &str, k: usize) -> Result<Vec<RetrievedPassage>, RetrievalError>;

    fn deterministic(&self) -> bool;
}

/// The standard retriever: a vector index plus the embedder it was built
/// with.
pub struct IndexRetriever {
    pub index: std::sync::Arc<VectorIndex>,
    pub embedder: std::sync::Arc<dyn Embedder>,
}

impl Retriever for IndexRetriever {
    fn search(&self, query: &str, k: usize) -> Result<Vec<RetrievedPassage>, RetrievalError> {
        let hits = self.index.search(query, k, self.embedder.as_ref())?;
        Ok(hits
            .into_iter()
            .map(|h| {
                let meta = self
                    .index
                    .chunk_by_id(&h.chunk_id)
                    .expect("hit id always present in index");
                RetrievedPassage {
                    chunk_id: h.chunk_id,
                    score: h.score,
                    rank: h.rank,
                    title: meta.title.clone(),
                    text: meta.text.clone(),
                }
            })
            .collect())
    }

    fn deterministic(&self) -> bool {
        self.embedder.deterministic()
    }
}
