//! Chat-completion backends.
//!
//! Every agent call goes through the [`ChatBackend`] trait, so the engine
//! runs identically against a live OpenAI-compatible endpoint
//! ([`RemoteBackend`]), a deterministic fixture responder
//! ([`ScriptedBackend`]), or a recorded cassette ([`ReplayBackend`]).
//! [`RecordBackend`] wraps any of them and persists prompt-hash → response
//! pairs for later replay.

mod record;
mod remote;
mod replay;
mod scripted;

pub use record::RecordBackend;
pub use remote::{BackoffConfig, RemoteBackend, RemoteConfig};
pub use replay::ReplayBackend;
pub use scripted::{MatchKind, ScriptEntry, ScriptedBackend};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("timeout: {0}")]
    Timeout(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("http {status}: {detail}")]
    Http { status: u16, detail: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no script entry matches user message: {prompt_tail:?}")]
    NoScriptMatch { prompt_tail: String },
    #[error("cassette miss for prompt hash {prompt_sha256}")]
    CassetteMiss { prompt_sha256: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_id: String,
}

impl CompletionRequest {
    pub fn new(messages: Vec<ChatMessage>) -> Self {
        Self {
            messages,
            temperature: 0.0,
            max_tokens: 1024,
            model_id: "default".to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.messages.is_empty() {
            return Err(BackendError::InvalidRequest(
                "message list is empty".to_string(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} < 0",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens is 0".to_string()));
        }
        Ok(())
    }

    /// Content of the most recent user turn; scripted matchers run against
    /// this.
    pub fn last_user_content(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }

    /// Stable hash of the message sequence. Cassettes are keyed by this, so
    /// it covers role and content only — not decoding parameters.
    pub fn prompt_sha256(&self) -> String {
        let mut hasher = Sha256::new();
        for m in &self.messages {
            hasher.update(m.role.as_str().as_bytes());
            hasher.update(b"\n");
            hasher.update(m.content.as_bytes());
            hasher.update([0x1e]);
        }
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    #[serde(default)]
    pub usage: Usage,
}

impl Completion {
    pub fn text_only(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            usage: Usage::default(),
        }
    }
}

/// One request/response exchange plus timing, as kept in call logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub request: CompletionRequest,
    pub response: Completion,
    pub duration_ms: u64,
}

impl ChatExchange {
    /// Run one timed call. On failure the error is returned together with
    /// the elapsed time so the caller can still log the attempt.
    pub fn capture(
        backend: &dyn ChatBackend,
        req: &CompletionRequest,
        clock: crate::clock::RunClock,
    ) -> Result<Self, (BackendError, u64)> {
        let (result, duration_ms) = clock.time(|| backend.chat(req));
        match result {
            Ok(response) => Ok(Self {
                request: req.clone(),
                response,
                duration_ms,
            }),
            Err(e) => Err((e, duration_ms)),
        }
    }
}

pub trait ChatBackend: Send + Sync {
    fn chat(&self, req: &CompletionRequest) -> Result<Completion, BackendError>;

    /// Short identifier for logs ("scripted", "remote", ...).
    fn name(&self) -> &'static str;

    /// True when identical requests always yield identical responses, which
    /// lets the engine switch to the logical clock for byte-stable
    /// transcripts.
    fn deterministic(&self) -> bool;
}
