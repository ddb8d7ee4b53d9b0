//! OpenAI-compatible chat endpoint client with retry.
//!
//! Wire format: `POST {base_url}/v1/chat/completions` with
//! `{model, messages: [{role, content}], temperature, max_tokens}`.
//! Timeouts, 429s, 5xx and transport failures are retried with exponential
//! backoff plus jitter up to `BackoffConfig::max_attempts`, then surfaced.
//! A counting semaphore bounds in-flight requests.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use rand::Rng;
use serde::Deserialize;
use serde_json::json;

use super::{BackendError, ChatBackend, Completion, CompletionRequest, Usage};

#[derive(Debug, Clone)]
pub struct BackoffConfig {
    pub base_ms: u64,
    pub factor: f64,
    pub max_attempts: u32,
    pub max_backoff_ms: u64,
}

impl Default for BackoffConfig {
    fn default() -> Self {
        Self {
            base_ms: 500,
            factor: 2.0,
            max_attempts: 5,
            max_backoff_ms: 30_000,
        }
    }
}

impl BackoffConfig {
    /// Delay before retry number `attempt` (1-based), jittered by up to +25%.
    fn delay(&self, attempt: u32) -> Duration {
        let exp = self.base_ms as f64 * self.factor.powi(attempt.saturating_sub(1) as i32);
        let jitter = 1.0 + rand::thread_rng().gen_range(0.0..0.25);
        Duration::from_millis(((exp * jitter) as u64).min(self.max_backoff_ms))
    }
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout_ms: u64,
    pub backoff: BackoffConfig,
    pub max_in_flight: usize,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            timeout_ms: 60_000,
            backoff: BackoffConfig::default(),
            max_in_flight: 8,
        }
    }
}

struct Gate {
    available: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(permits: usize) -> Self {
        Self {
            available: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut n = self.available.lock().unwrap();
        while *n == 0 {
            n = self.cv.wait(n).unwrap();
        }
        *n -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.gate.available.lock().unwrap();
        *n += 1;
        self.gate.cv.notify_one();
    }
}

pub struct RemoteBackend {
    cfg: RemoteConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: Option<String>,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
    #[serde(default)]
    total_tokens: u64,
}

impl RemoteBackend {
    pub fn new(cfg: RemoteConfig) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let gate = Gate::new(cfg.max_in_flight);
        Ok(Self { cfg, client, gate })
    }

    fn attempt(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        let model = if req.model_id == "default" {
            self.cfg.model.clone()
        } else {
            req.model_id.clone()
        };
        let body = json!({
            "model": model,
            "messages": req.messages.iter().map(|m| {
                json!({"role": m.role.as_str(), "content": m.content})
            }).collect::<Vec<_>>(),
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let url = format!(
            "{}/v1/chat/completions",
            self.cfg.base_url.trim_end_matches('/')
        );
        let mut request = self.client.post(url).json(&body);
        if let Some(key) = &self.cfg.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(classify_transport)?;
        let status = response.status();
        let text = response.text().map_err(classify_transport)?;
        if status.as_u16() == 429 {
            return Err(BackendError::RateLimited(truncate(&text)));
        }
        if !status.is_success() {
            return Err(BackendError::Http {
                status: status.as_u16(),
                detail: truncate(&text),
            });
        }
        let wire: WireResponse = serde_json::from_str(&text)
            .map_err(|e| BackendError::MalformedResponse(format!("{e}: {}", truncate(&text))))?;
        let content = wire
            .choices
            .first()
            .and_then(|c| c.message.content.clone())
            .ok_or_else(|| {
                BackendError::MalformedResponse("response has no choices[0].message.content".into())
            })?;
        let usage = wire.usage.unwrap_or_default();
        Ok(Completion {
            text: content,
            usage: Usage {
                prompt_tokens: usage.prompt_tokens,
                completion_tokens: usage.completion_tokens,
                total_tokens: usage.total_tokens,
            },
        })
    }
}

fn classify_transport(e: reqwest::Error) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout(e.to_string())
    } else {
        BackendError::Transport(e.to_string())
    }
}

fn truncate(text: &str) -> String {
    text.chars().take(300).collect()
}

fn retryable(err: &BackendError) -> bool {
    match err {
        BackendError::Timeout(_) | BackendError::RateLimited(_) | BackendError::Transport(_) => {
            true
        }
        BackendError::Http { status, .. } => *status >= 500,
        _ => false,
    }
}

impl ChatBackend for RemoteBackend {
    fn chat(&self, req: &CompletionRequest) -> Result<Completion, BackendError> {
        req.validate()?;
        let _permit = self.gate.acquire();
        let mut attempt = 1u32;
        loop {
            match self.attempt(req) {
                Ok(c) => return Ok(c),
                Err(err) if retryable(&err) && attempt < self.cfg.backoff.max_attempts => {
                    let delay = self.cfg.backoff.delay(attempt);
                    log::warn!(
                        "chat attempt {attempt}/{} failed ({err}); retrying in {:?}",
                        self.cfg.backoff.max_attempts,
                        delay
                    );
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                Err(err) => return Err(err),
            }
        }
    }

    fn name(&self) -> &'static str {
        "remote"
    }

    fn deterministic(&self) -> bool {
        false
    }
}
