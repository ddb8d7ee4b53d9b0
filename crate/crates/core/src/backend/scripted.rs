//! Deterministic fixture backend: pattern-matched canned responses.
//!
//! Entries are tried in file order against the rendered user message (the
//! most recent user turn); the first live match wins. An entry with
//! `max_uses` stops matching once exhausted, which lets a fixture return
//! different responses to repeated identical prompts.

use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{BackendError, ChatBackend, Completion, CompletionRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Substring,
    Regex,
}

/// One fixture rule, stored as a JSON Lines record:
/// `{"match": "substring", "pattern": "...", "response": "...", "max_uses": 1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(rename = "match")]
    pub matcher: MatchKind,
    pub pattern: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_uses: Option<u32>,
}

enum Compiled {
    Exact(String),
    Substring(String),
    Regex(Regex),
}

impl Compiled {
    fn matches(&self, text: &str) -> bool {
        match self {
            Compiled::Exact(p) => text == p,
            Compiled::Substring(p) => text.contains(p.as_str()),
            Compiled::Regex(re) => re.is_match(text),
        }
    }
}

struct DelayInjector {
    rng: Mutex<ChaCha20Rng>,
    max_ms: u64,
}

pub struct ScriptedBackend {
    entries: Vec<(ScriptEntry, Compiled)>,
    uses: Mutex<Vec<u32>>,
    delay: Option<DelayInjector>,
}

impl ScriptedBackend {
    pub fn from_entries(entries: Vec<ScriptEntry>) -> Result<Self, BackendError> {
        let mut compiled = Vec::with_capacity(entries.len());
        for e in entries {
            if e.pattern.is_empty() {
                return Err(BackendError::InvalidRequest(
                    "script entry with empty pattern".to_string(),
                ));
            }
            if let Some(0) = e.max_uses {
                return Err(BackendError::InvalidRequest(
                    "script entry with max_uses = 0".to_string(),
                ));
            }
            let c = match e.matcher {
                MatchKind::Exact => Compiled::Exact(e.pattern.clone()),
                MatchKind::Substring => Compiled::Substring(e.pattern.clone()),
                MatchKind::Regex => Compiled::Regex(Regex::new(&e.pattern).map_err(|err| {
                    BackendError::InvalidRequest(format!("bad regex {:?}: {err}", e.pattern))
                })?),
            };
            compiled.push((e, c));
        }
        let uses = Mutex::new(vec![0u32; compiled.len()]);
        Ok(Self {
            entries: compiled,
            uses,
            delay: None,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entry: ScriptEntry = serde_json::from_str(line).map_err(|e| {
                BackendError::InvalidRequest(format!("script line {}: {e}", lineno + 1))
            })?;
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    /// Sleep a seeded-random amount (up to `max_ms`) before each response.
    /// Test aid for exercising concurrent callers; responses are unaffected.
    pub fn with_random_delays(mut self, seed: u64, max_ms: u64) -> Self {
        self.delay = Some(DelayInjector {
            rng: Mutex::new(ChaCha20Rng::seed_from_u64(seed)),
            max_ms,
        });
        self
    }
}

impl ChatBackend for ScriptedBackend {
    fn chat(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        req.validate()?;
        let target = req.last_user_content().ok_or_else(|| {
            BackendError::InvalidRequest("request has no user message".to_string())
        })?;
        if let Some(d) = &self.delay {
            let ms = d.rng.lock().unwrap().gen_range(0..=d.max_ms);
            std::thread::sleep(Duration::from_millis(ms));
        }
        let mut uses = self.uses.lock().unwrap();
        for (i, (entry, compiled)) in self.entries.iter().enumerate() {
            if let Some(max) = entry.max_uses {
                if uses[i] >= max {
                    continue;
                }
            }
            if compiled.matches(target) {
                uses[i] += 1;
                return Ok(Completion::text_only(entry.response.clone()));
            }
        }
        let tail: String = target.chars().rev().take(120).collect::<Vec<_>>().iter().rev().collect();
        Err(BackendError::NoScriptMatch { prompt_tail: tail })
    }

    fn name(&self) -> &'static str {
        "scripted"
    }

    fn deterministic(&self) -> bool {
        true
    }
}
