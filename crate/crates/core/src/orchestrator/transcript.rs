//! Run transcripts: everything needed to audit or replay a run.
//!
//! A transcript embeds the engine config (plus its hash), the final graph
//! state, every model call with its prompt hash, and every retrieval with
//! full passages. That makes a transcript self-contained: feeding its calls
//! into a replay backend and its retrievals into a transcript retriever
//! regenerates the identical graph state.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::AgentCallRecord;
use crate::backend::ReplayBackend;
use crate::retrieval::{RetrievalError, RetrievedPassage, Retriever};
use crate::state::GraphState;

use super::EngineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted,
}

/// How a finished run should be reported to the outside world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Answered,
    Unanswered,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalRecord {
    pub step_index: usize,
    pub query: String,
    pub k: usize,
    pub hits: Vec<RetrievedPassage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub config: EngineConfig,
    pub config_sha256: String,
    pub question: String,
    pub status: RunStatus,
    pub abort_reason: Option<String>,
    pub graph_state: GraphState,
    pub agent_calls: Vec<AgentCallRecord>,
    pub retrievals: Vec<RetrievalRecord>,
    pub started_unix_ms: u64,
    pub total_ms: u64,
}

impl RunTranscript {
    pub fn outcome(&self) -> RunOutcome {
        match self.status {
            RunStatus::Aborted => RunOutcome::Aborted,
            RunStatus::Completed if self.graph_state.final_answer.is_empty() => {
                RunOutcome::Unanswered
            }
            RunStatus::Completed => RunOutcome::Answered,
        }
    }

    pub fn call_count(&self, agent: &str) -> usize {
        self.agent_calls.iter().filter(|c| c.agent == agent).count()
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("transcript serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Write atomically: temp file in the same directory, then rename.
    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_json_pretty())?;
        std::fs::rename(&tmp, path)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }

    /// A replay backend serving this transcript's recorded completions.
    pub fn to_replay_backend(&self) -> ReplayBackend {
        ReplayBackend::from_pairs(
            self.agent_calls
                .iter()
                .map(|c| (c.prompt_sha256.clone(), c.raw_output.clone())),
        )
    }

    /// A retriever serving this transcript's recorded retrievals.
    pub fn to_replay_retriever(&self) -> TranscriptRetriever {
        TranscriptRetriever::from_records(&self.retrievals)
    }
}

/// Replays recorded retrievals keyed by query text.
pub struct TranscriptRetriever {
    by_query: HashMap<String, Vec<RetrievedPassage>>,
}

impl TranscriptRetriever {
    pub fn from_records(records: &[RetrievalRecord]) -> Self {
        let mut by_query = HashMap::new();
        for r in records {
            by_query
                .entry(r.query.clone())
                .or_insert_with(|| r.hits.clone());
        }
        Self { by_query }
    }
}

impl Retriever for TranscriptRetriever {
    fn search(&self, query: &str, k: usize) -> Result<Vec<RetrievedPassage>, RetrievalError> {
        match self.by_query.get(query) {
            Some(hits) => Ok(hits.iter().take(k).cloned().collect()),
            None => Err(RetrievalError::EmptyInput(format!(
                "no recorded retrieval for query {query:?}"
            ))),
        }
    }

    fn deterministic(&self) -> bool {
        true
    }
}
