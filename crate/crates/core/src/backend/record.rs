//! Recording wrapper: forwards to an inner backend and appends every
//! exchange to a cassette file consumable by [`super::ReplayBackend`].

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::replay::CassetteRecord;
use super::{BackendError, ChatBackend, Completion, CompletionRequest};

pub struct RecordBackend {
    inner: Arc<dyn ChatBackend>,
    path: PathBuf,
    sink: Mutex<RecordSink>,
}

struct RecordSink {
    file: File,
    seen: HashSet<String>,
}

impl RecordBackend {
    /// Wrap `inner`, appending to the cassette at `path` (created if absent).
    pub fn new(inner: Arc<dyn ChatBackend>, path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            inner,
            path,
            sink: Mutex::new(RecordSink {
                file,
                seen: HashSet::new(),
            }),
        })
    }

    pub fn cassette_path(&self) -> &Path {
        &self.path
    }
}

impl ChatBackend for RecordBackend {
    fn chat(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        let completion = self.inner.chat(req)?;
        let hash = req.prompt_sha256();
        let mut sink = self.sink.lock().unwrap();
        if sink.seen.insert(hash.clone()) {
            let record = CassetteRecord {
                prompt_sha256: hash,
                response: completion.text.clone(),
            };
            let line = serde_json::to_string(&record)
                .map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
            writeln!(sink.file, "{line}")?;
            sink.file.flush()?;
        }
        Ok(completion)
    }

    fn name(&self) -> &'static str {
        "record"
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ChatMessage, MatchKind, ReplayBackend, ScriptEntry, ScriptedBackend};

    fn scripted() -> Arc<dyn ChatBackend> {
        Arc::new(
            ScriptedBackend::from_entries(vec![
                ScriptEntry {
                    matcher: MatchKind::Exact,
                    pattern: "one".to_string(),
                    response: "first".to_string(),
                    max_uses: None,
                },
                ScriptEntry {
                    matcher: MatchKind::Exact,
                    pattern: "two".to_string(),
                    response: "second".to_string(),
                    max_uses: None,
                },
            ])
            .unwrap(),
        )
    }

    #[test]
    fn record_then_replay_serves_both_without_inner() {
        let dir = tempfile::tempdir().unwrap();
        let cassette = dir.path().join("session.jsonl");
        let recorder = RecordBackend::new(scripted(), &cassette).unwrap();

        let req1 = CompletionRequest::new(vec![ChatMessage::user("one")]);
        let req2 = CompletionRequest::new(vec![ChatMessage::user("two")]);
        assert_eq!(recorder.chat(&req1).unwrap().text, "first");
        assert_eq!(recorder.chat(&req2).unwrap().text, "second");

        let replay = ReplayBackend::from_path(&cassette).unwrap();
        assert_eq!(replay.len(), 2);
        assert_eq!(replay.chat(&req1).unwrap().text, "first");
        assert_eq!(replay.chat(&req2).unwrap().text, "second");
    }

    #[test]
    fn repeated_prompt_is_recorded_once() {
        let dir = tempfile::tempdir().unwrap();
        let cassette = dir.path().join("session.jsonl");
        let recorder = RecordBackend::new(scripted(), &cassette).unwrap();
        let req = CompletionRequest::new(vec![ChatMessage::user("one")]);
        recorder.chat(&req).unwrap();
        recorder.chat(&req).unwrap();
        let lines = std::fs::read_to_string(&cassette).unwrap();
        assert_eq!(lines.lines().count(), 1);
    }
}
