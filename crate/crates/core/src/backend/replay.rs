//! Cassette playback keyed by prompt hash.
//!
//! A cassette is JSON Lines of `{"prompt_sha256": "...", "response": "..."}`.
//! Lookup is by key, not position, so reordering the file on disk changes
//! nothing. One response per distinct prompt: if a recording contained two
//! different responses to the same prompt, the first wins.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BackendError, ChatBackend, Completion, CompletionRequest};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CassetteRecord {
    pub prompt_sha256: String,
    pub response: String,
}

pub struct ReplayBackend {
    responses: HashMap<String, String>,
}

impl ReplayBackend {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)?;
        let mut responses = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let rec: CassetteRecord = serde_json::from_str(line).map_err(|e| {
                BackendError::MalformedResponse(format!("cassette line {}: {e}", lineno + 1))
            })?;
            responses.entry(rec.prompt_sha256).or_insert(rec.response);
        }
        Ok(Self { responses })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut responses = HashMap::new();
        for (hash, response) in pairs {
            responses.entry(hash).or_insert(response);
        }
        Self { responses }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl ChatBackend for ReplayBackend {
    fn chat(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        req.validate()?;
        let key = req.prompt_sha256();
        match self.responses.get(&key) {
            Some(text) => Ok(Completion::text_only(text.clone())),
            None => Err(BackendError::CassetteMiss { prompt_sha256: key }),
        }
    }

    fn name(&self) -> &'static str {
        "replay"
    }

    fn deterministic(&self) -> bool {
        true
    }
}
