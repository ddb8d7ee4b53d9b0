//! The four agents: planner, step definer, extractor, QA.
//!
//! Each agent operation renders its template, calls the backend, and parses
//! the output into a state type. On a parse failure the call is retried once
//! per configured repair: the bad output and the parse error are appended to
//! the conversation and the model gets another try. Every model call is
//! pushed onto the caller's log, including failed ones, so aborted runs keep
//! their partial transcript.

mod parse;
mod template;

pub use parse::{extract_structured, is_sentinel, parse_notes, parse_plan, parse_qa,
    parse_step_task, NoteList, ParseError};
pub use template::{FewShotExample, PromptTemplate, TemplateSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{
    BackendError, ChatBackend, ChatExchange, ChatMessage, CompletionRequest, Usage,
};
use crate::clock::RunClock;
use crate::state::{PlanExecState, PlanState, QAAnswerState, StepTaskState};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("template error: {0}")]
    Template(String),
    #[error("{agent} output unparseable after {attempts} attempt(s): {error}")]
    ParseFailure {
        agent: &'static str,
        attempts: u32,
        error: ParseError,
    },
    #[error("backend: {0}")]
    Backend(#[from] BackendError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Canonical sentinel used when rendering empty evidence for the QA agent.
pub const SENTINEL_NOTE: &str = "No related information from this document.";

/// One model call as kept in transcripts: the full rendered conversation,
/// the raw completion, and what it parsed into (if anything).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCallRecord {
    pub agent: String,
    pub prompt: Vec<ChatMessage>,
    pub prompt_sha256: String,
    pub raw_output: String,
    pub parsed: Option<serde_json::Value>,
    pub duration_ms: u64,
    #[serde(default)]
    pub usage: Usage,
}

/// Evidence handed to the QA agent: one group per source document (or an
/// unlabeled group for aggregated history).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceGroup {
    pub source_id: Option<String>,
    pub notes: NoteList,
}

impl EvidenceGroup {
    pub fn from_doc(doc_id: impl Into<String>, notes: NoteList) -> Self {
        Self {
            source_id: Some(doc_id.into()),
            notes,
        }
    }

    pub fn unlabeled(notes: NoteList) -> Self {
        Self {
            source_id: None,
            notes,
        }
    }
}

/// Render evidence groups into the QA context slot: one line per document,
/// sentinel documents shown with the canonical sentinel so the model can see
/// which sources had nothing.
pub fn render_evidence(groups: &[EvidenceGroup]) -> String {
    let mut lines = Vec::new();
    for g in groups {
        match &g.source_id {
            Some(id) => {
                if g.notes.is_empty_sentinel || g.notes.notes.is_empty() {
                    lines.push(format!("doc-{id}: {SENTINEL_NOTE}"));
                } else {
                    lines.push(format!("doc-{id}: {}", g.notes.notes.join(" ")));
                }
            }
            None => {
                if g.notes.is_empty_sentinel || g.notes.notes.is_empty() {
                    lines.push(SENTINEL_NOTE.to_string());
                } else {
                    lines.extend(g.notes.notes.iter().cloned());
                }
            }
        }
    }
    lines.join("\n")
}

/// Agent-side configuration: backend binding plus decoding defaults.
pub struct AgentRuntime<'a> {
    backend: &'a dyn ChatBackend,
    templates: &'a TemplateSet,
    clock: RunClock,
    pub max_parse_repairs: u32,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_id: String,
}

impl<'a> AgentRuntime<'a> {
    pub fn new(backend: &'a dyn ChatBackend, templates: &'a TemplateSet, clock: RunClock) -> Self {
        Self {
            backend,
            templates,
            clock,
            max_parse_repairs: 1,
            temperature: 0.0,
            max_tokens: 1024,
            model_id: "default".to_string(),
        }
    }

    fn request(&self, messages: Vec<ChatMessage>) -> CompletionRequest {
        CompletionRequest {
            messages,
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            model_id: self.model_id.clone(),
        }
    }

    /// Chat + parse with the repair loop. Appends one record per model call.
    fn call_and_parse<T>(
        &self,
        agent: &'static str,
        mut messages: Vec<ChatMessage>,
        parse: impl Fn(&str) -> Result<T, ParseError>,
        log: &mut Vec<AgentCallRecord>,
    ) -> Result<T, AgentError> {
        let attempts = self.max_parse_repairs + 1;
        let mut last_error = ParseError::NoJson;
        for attempt in 1..=attempts {
            let req = self.request(messages.clone());
            let prompt_sha256 = req.prompt_sha256();
            let exchange = match ChatExchange::capture(self.backend, &req, self.clock) {
                Ok(ex) => ex,
                Err((e, duration_ms)) => {
                    log.push(AgentCallRecord {
                        agent: agent.to_string(),
                        prompt: req.messages,
                        prompt_sha256,
                        raw_output: String::new(),
                        parsed: None,
                        duration_ms,
                        usage: Usage::default(),
                    });
                    return Err(AgentError::Backend(e));
                }
            };
            let raw = exchange.response.text;
            let parsed = parse(&raw);
            log.push(AgentCallRecord {
                agent: agent.to_string(),
                prompt: exchange.request.messages,
                prompt_sha256,
                raw_output: raw.clone(),
                parsed: parsed
                    .as_ref()
                    .ok()
                    .map(|_| extract_structured(&raw).unwrap_or(serde_json::Value::Null)),
                duration_ms: exchange.duration_ms,
                usage: exchange.response.usage,
            });
            match parsed {
                Ok(value) => return Ok(value),
                Err(err) => {
                    last_error = err.clone();
                    if attempt < attempts {
                        messages.push(ChatMessage::assistant(raw));
                        messages.push(ChatMessage::user(format!(
                            "Parse error: {err}. Reply with only the corrected structured output."
                        )));
                    }
                }
            }
        }
        Err(AgentError::ParseFailure {
            agent,
            attempts,
            error: last_error,
        })
    }

    /// Decompose `question` into an ordered plan of sub-tasks.
    pub fn plan(
        &self,
        question: &str,
        max_plan_steps: usize,
        log: &mut Vec<AgentCallRecord>,
    ) -> Result<PlanState, AgentError> {
        if question.trim().is_empty() {
            return Err(AgentError::InvalidInput("question is blank".into()));
        }
        let t = &self.templates.planner;
        let mut messages = vec![ChatMessage::system(t.render_system(&[])?)];
        for ex in &self.templates.planner_fewshot {
            messages.push(ChatMessage::user(
                t.render_user(&[("Question", ex.question.as_str())])?,
            ));
            messages.push(ChatMessage::assistant(ex.response.clone()));
        }
        messages.push(ChatMessage::user(
            t.render_user(&[("Question", question)])?,
        ));
        self.call_and_parse(
            "planner",
            messages,
            |raw| parse_plan(raw, max_plan_steps),
            log,
        )
    }

    /// Turn plan step `step_index` into a concrete task, conditioned on the
    /// results of the finished steps.
    pub fn define_step(
        &self,
        plan: &PlanState,
        step_index: usize,
        history: &PlanExecState,
        log: &mut Vec<AgentCallRecord>,
    ) -> Result<StepTaskState, AgentError> {
        if step_index >= plan.steps.len() {
            return Err(AgentError::InvalidInput(format!(
                "step index {step_index} out of range for {}-step plan",
                plan.steps.len()
            )));
        }
        if history.completed_steps() != step_index {
            return Err(AgentError::InvalidInput(format!(
                "history covers {} steps, expected {step_index}",
                history.completed_steps()
            )));
        }
        let t = &self.templates.step_definer;
        let plan_json = serde_json::to_string(&plan.steps)
            .map_err(|e| AgentError::Template(e.to_string()))?;
        let memory = crate::state::render_history(history);
        let messages = vec![
            ChatMessage::system(t.render_system(&[])?),
            ChatMessage::user(t.render_user(&[
                ("plan", plan_json.as_str()),
                ("cur_step", plan.steps[step_index].as_str()),
                ("memory", memory.as_str()),
            ])?),
        ];
        self.call_and_parse("step_definer", messages, parse_step_task, log)
    }

    /// Distill the notes from one passage that bear on `question`.
    pub fn extract(
        &self,
        passage: &str,
        question: &str,
        log: &mut Vec<AgentCallRecord>,
    ) -> Result<NoteList, AgentError> {
        if passage.trim().is_empty() || question.trim().is_empty() {
            return Err(AgentError::InvalidInput(
                "passage and question must be non-blank".into(),
            ));
        }
        let t = &self.templates.extractor;
        let messages = vec![
            ChatMessage::system(t.render_system(&[])?),
            ChatMessage::user(t.render_user(&[
                ("passage", passage),
                ("question", question),
            ])?),
        ];
        self.call_and_parse("extractor", messages, parse_notes, log)
    }

    /// Synthesize an answer from the evidence groups. The model is always
    /// consulted, but if every group is empty the result is forced to an
    /// unsuccessful, empty answer regardless of what the model claimed.
    pub fn answer(
        &self,
        question: &str,
        evidence: &[EvidenceGroup],
        log: &mut Vec<AgentCallRecord>,
    ) -> Result<QAAnswerState, AgentError> {
        if evidence.is_empty() {
            return Err(AgentError::InvalidInput(
                "at least one evidence group is required".into(),
            ));
        }
        let t = &self.templates.qa;
        let context = render_evidence(evidence);
        let messages = vec![
            ChatMessage::system(t.render_system(&[])?),
            ChatMessage::user(t.render_user(&[
                ("context", context.as_str()),
                ("question", question),
            ])?),
        ];
        let mut out = self.call_and_parse("qa", messages, parse_qa, log)?;
        let all_empty = evidence
            .iter()
            .all(|g| g.notes.is_empty_sentinel || g.notes.notes.is_empty());
        if all_empty {
            out.success = false;
            out.answer = String::new();
        }
        Ok(out)
    }
}
