//! The run executor: plan once, then per step define → retrieve → extract →
//! answer, threading the accumulated history into every later step.
//!
//! Agents are invoked on demand. The planner runs once per plan attempt; for
//! each step the definer produces a concrete task; search tasks retrieve
//! top-k passages and fan extraction out over them (one extractor call per
//! passage, concurrently, joined in retrieval order); aggregate tasks skip
//! retrieval and answer over the rendered history. Ablation switches drop
//! the planner (single retrieval round on the raw question, no definer) or
//! the extractor (raw chunk texts stand in for notes).
//!
//! Terminal agent failures do not panic or bubble: the failing step is
//! recorded with `success = false`, the run is marked aborted, and the
//! partial transcript survives.

mod transcript;

pub use transcript::{
    RetrievalRecord, RunOutcome, RunStatus, RunTranscript, TranscriptRetriever,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{
    AgentCallRecord, AgentRuntime, EvidenceGroup, NoteList, TemplateSet,
};
use crate::backend::ChatBackend;
use crate::clock::RunClock;
use crate::retrieval::{source_doc_id, Retriever};
use crate::state::{
    history_lines, render_history, GraphState, PlanExecState, PlanState, PlanSummaryState,
    QAAnswerState, RagState, StepTaskState, TaskType,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("question is blank")]
    BlankQuestion,
}

/// Engine switches. Serialized into every transcript and hashed, so replays
/// can detect config drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub k: usize,
    pub max_plan_steps: usize,
    pub planner_enabled: bool,
    pub extractor_enabled: bool,
    pub max_parse_repairs: u32,
    pub max_replans: u32,
    /// Optional success gate on the QA confidence rating. Off by default;
    /// ratings are recorded but do not steer the run.
    pub min_rating: Option<i64>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_id: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            k: 5,
            max_plan_steps: 8,
            planner_enabled: true,
            extractor_enabled: true,
            max_parse_repairs: 1,
            max_replans: 0,
            min_rating: None,
            temperature: 0.0,
            max_tokens: 1024,
            model_id: "default".to_string(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.k < 1 {
            return Err(EngineError::Config("k must be at least 1".into()));
        }
        if self.max_plan_steps < 1 {
            return Err(EngineError::Config("max_plan_steps must be at least 1".into()));
        }
        if self.max_tokens == 0 {
            return Err(EngineError::Config("max_tokens must be positive".into()));
        }
        if self.temperature < 0.0 {
            return Err(EngineError::Config("temperature must be >= 0".into()));
        }
        Ok(())
    }

    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// A step-level failure that ends the run but keeps the transcript.
#[derive(Debug, Error)]
#[error("{reason}")]
pub struct RunAbort {
    pub reason: String,
}

pub struct Engine {
    cfg: EngineConfig,
    backend: Arc<dyn ChatBackend>,
    retriever: Arc<dyn Retriever>,
    templates: Arc<TemplateSet>,
    clock: RunClock,
}

impl Engine {
    pub fn new(
        cfg: EngineConfig,
        backend: Arc<dyn ChatBackend>,
        retriever: Arc<dyn Retriever>,
        templates: Arc<TemplateSet>,
    ) -> Result<Self, EngineError> {
        cfg.validate()?;
        let clock = if backend.deterministic() && retriever.deterministic() {
            RunClock::Logical
        } else {
            RunClock::Wall
        };
        Ok(Self {
            cfg,
            backend,
            retriever,
            templates,
            clock,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn clock(&self) -> RunClock {
        self.clock
    }

    fn agent_runtime(&self) -> AgentRuntime<'_> {
        let mut rt = AgentRuntime::new(self.backend.as_ref(), self.templates.as_ref(), self.clock);
        rt.max_parse_repairs = self.cfg.max_parse_repairs;
        rt.temperature = self.cfg.temperature;
        rt.max_tokens = self.cfg.max_tokens;
        rt.model_id = self.cfg.model_id.clone();
        rt
    }

    /// Execute one full run. Agent and retrieval failures end the run with
    /// `status = aborted` inside the returned transcript; only precondition
    /// violations return `Err`.
    pub fn run(&self, question: &str) -> Result<RunTranscript, EngineError> {
        if question.trim().is_empty() {
            return Err(EngineError::BlankQuestion);
        }
        let started_unix_ms = self.clock.now_unix_ms();
        let mut calls: Vec<AgentCallRecord> = Vec::new();
        let mut retrievals: Vec<RetrievalRecord> = Vec::new();
        let mut graph = GraphState::new(question);
        let mut status = RunStatus::Completed;
        let mut abort_reason: Option<String> = None;

        let ((), total_ms) = self.clock.time(|| {
            for attempt in 0..=self.cfg.max_replans {
                let rt = self.agent_runtime();
                let plan_steps: Vec<String> = if self.cfg.planner_enabled {
                    match rt.plan(question, self.cfg.max_plan_steps, &mut calls) {
                        Ok(p) => p.steps,
                        Err(e) => {
                            status = RunStatus::Aborted;
                            abort_reason = Some(format!("planner: {e}"));
                            let mut exec = PlanExecState::new(question, Vec::new());
                            exec.stop = true;
                            graph.past_exp.push(exec);
                            return;
                        }
                    }
                } else {
                    vec![question.to_string()]
                };
                graph.plan = plan_steps.clone();
                let mut exec = PlanExecState::new(question, plan_steps);
                while !exec.is_complete() {
                    let i = exec.completed_steps();
                    if let Err(abort) = self.run_step(&mut exec, i, &mut calls, &mut retrievals) {
                        status = RunStatus::Aborted;
                        abort_reason = Some(abort.reason);
                        exec.stop = true;
                        graph.past_exp.push(exec);
                        return;
                    }
                }
                let answer = finalize(&mut exec);
                let done = !answer.is_empty() || attempt == self.cfg.max_replans;
                exec.stop = done;
                graph.final_answer = answer;
                graph.past_exp.push(exec);
                if done {
                    return;
                }
                log::info!("empty answer after attempt {attempt}; re-planning");
            }
        });

        Ok(RunTranscript {
            config: self.cfg.clone(),
            config_sha256: self.cfg.sha256(),
            question: question.to_string(),
            status,
            abort_reason,
            graph_state: graph,
            agent_calls: calls,
            retrievals,
            started_unix_ms,
            total_ms,
        })
    }

    /// Execute step `step_index` (which must be the next uncompleted step).
    /// On failure the step is recorded as unsuccessful before the abort is
    /// returned, so the exec state stays aligned.
    pub fn run_step(
        &self,
        exec: &mut PlanExecState,
        step_index: usize,
        calls: &mut Vec<AgentCallRecord>,
        retrievals: &mut Vec<RetrievalRecord>,
    ) -> Result<(), RunAbort> {
        if step_index != exec.completed_steps() || step_index >= exec.plan.len() {
            return Err(RunAbort {
                reason: format!(
                    "step {step_index} out of sequence ({} completed of {})",
                    exec.completed_steps(),
                    exec.plan.len()
                ),
            });
        }
        let rt = self.agent_runtime();

        let task = if self.cfg.planner_enabled {
            let plan_state = PlanState {
                analysis: String::new(),
                steps: exec.plan.clone(),
            };
            match rt.define_step(&plan_state, step_index, exec, calls) {
                Ok(t) => t,
                Err(e) => {
                    let placeholder = StepTaskState {
                        task_type: TaskType::Search,
                        task: exec.plan[step_index].clone(),
                    };
                    let reason = format!("step_definer: {e}");
                    self.record_failed_step(exec, placeholder, &reason, vec![], vec![]);
                    return Err(RunAbort { reason });
                }
            }
        } else {
            // Single-turn mode: the raw question is the retrieval query.
            StepTaskState {
                task_type: TaskType::Search,
                task: exec.original_question.clone(),
            }
        };

        match task.task_type {
            TaskType::Search => self.run_search_step(exec, step_index, task, &rt, calls, retrievals),
            TaskType::Aggregate => self.run_aggregate_step(exec, task, &rt, calls),
        }
    }

    fn run_search_step(
        &self,
        exec: &mut PlanExecState,
        step_index: usize,
        task: StepTaskState,
        rt: &AgentRuntime<'_>,
        calls: &mut Vec<AgentCallRecord>,
        retrievals: &mut Vec<RetrievalRecord>,
    ) -> Result<(), RunAbort> {
        let passages = match self.retriever.search(&task.task, self.cfg.k) {
            Ok(p) => p,
            Err(e) => {
                let reason = format!("retrieval: {e}");
                self.record_failed_step(exec, task, &reason, vec![], vec![]);
                return Err(RunAbort { reason });
            }
        };
        retrievals.push(RetrievalRecord {
            step_index,
            query: task.task.clone(),
            k: self.cfg.k,
            hits: passages.clone(),
        });
        let ids: Vec<String> = passages.iter().map(|p| p.chunk_id.clone()).collect();
        let mut rag = match RagState::new(
            task.task.clone(),
            passages.iter().map(|p| p.text.clone()).collect(),
            ids.clone(),
        ) {
            Ok(r) => r,
            Err(e) => {
                let reason = format!("retrieval returned inconsistent passages: {e}");
                self.record_failed_step(exec, task, &reason, ids, vec![]);
                return Err(RunAbort { reason });
            }
        };

        let groups: Vec<EvidenceGroup> = if self.cfg.extractor_enabled {
            // One extractor call per passage, concurrently; note lists and
            // call logs are joined in retrieval order regardless of which
            // call finishes first.
            let results: Vec<(Result<NoteList, _>, Vec<AgentCallRecord>)> =
                std::thread::scope(|scope| {
                    let handles: Vec<_> = passages
                        .iter()
                        .map(|p| {
                            let rt_ref = &rt;
                            let query = task.task.as_str();
                            scope.spawn(move || {
                                let mut local = Vec::new();
                                let outcome = rt_ref.extract(&p.text, query, &mut local);
                                (outcome, local)
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("extractor thread panicked"))
                        .collect()
                });
            let mut groups = Vec::with_capacity(results.len());
            let mut first_error: Option<String> = None;
            for (p, (outcome, local)) in passages.iter().zip(results) {
                calls.extend(local);
                match outcome {
                    Ok(notes) => groups.push(EvidenceGroup::from_doc(
                        source_doc_id(&p.chunk_id).to_string(),
                        notes,
                    )),
                    Err(e) => {
                        if first_error.is_none() {
                            first_error = Some(format!("extractor: {e}"));
                        }
                    }
                }
            }
            if let Some(reason) = first_error {
                self.record_failed_step(exec, task, &reason, ids, vec![]);
                return Err(RunAbort { reason });
            }
            groups
        } else {
            passages
                .iter()
                .map(|p| {
                    EvidenceGroup::from_doc(
                        source_doc_id(&p.chunk_id).to_string(),
                        NoteList::from_notes(vec![p.text.clone()]),
                    )
                })
                .collect()
        };

        rag.notes = groups
            .iter()
            .filter(|g| !g.notes.is_empty_sentinel)
            .flat_map(|g| g.notes.notes.iter().cloned())
            .collect();

        let out = match rt.answer(&task.task, &groups, calls) {
            Ok(o) => o,
            Err(e) => {
                let reason = format!("qa: {e}");
                self.record_failed_step(exec, task, &reason, ids, rag.notes);
                return Err(RunAbort { reason });
            }
        };
        let out = self.apply_rating_gate(out);
        rag.final_raw_answer = Some(out.clone());
        exec.append_step(task, out, ids, rag.notes)
            .map_err(|e| RunAbort {
                reason: format!("state: {e}"),
            })
    }

    fn run_aggregate_step(
        &self,
        exec: &mut PlanExecState,
        task: StepTaskState,
        rt: &AgentRuntime<'_>,
        calls: &mut Vec<AgentCallRecord>,
    ) -> Result<(), RunAbort> {
        let lines = history_lines(exec);
        let group = if lines.is_empty() {
            EvidenceGroup::unlabeled(NoteList::sentinel())
        } else {
            EvidenceGroup::unlabeled(NoteList::from_notes(lines))
        };
        let out = match rt.answer(&task.task, &[group], calls) {
            Ok(o) => o,
            Err(e) => {
                let reason = format!("qa: {e}");
                self.record_failed_step(exec, task, &reason, vec![], vec![]);
                return Err(RunAbort { reason });
            }
        };
        let out = self.apply_rating_gate(out);
        exec.append_step(task, out, vec![], vec![])
            .map_err(|e| RunAbort {
                reason: format!("state: {e}"),
            })
    }

    fn apply_rating_gate(&self, mut out: QAAnswerState) -> QAAnswerState {
        if let Some(min) = self.cfg.min_rating {
            if out.success && out.rating < min {
                log::warn!("rating {} below threshold {min}; marking step unsuccessful", out.rating);
                out.success = false;
            }
        }
        out
    }

    fn record_failed_step(
        &self,
        exec: &mut PlanExecState,
        task: StepTaskState,
        reason: &str,
        ids: Vec<String>,
        notes: Vec<String>,
    ) {
        let out = QAAnswerState::failed(format!("step aborted: {reason}"));
        if exec.append_step(task, out, ids, notes).is_err() {
            log::error!("could not record failed step: ledger full");
        }
    }
}

/// Final answer selection: the answer of the last successful step, or empty
/// when no step succeeded. Also fills the plan summary.
pub fn finalize(exec: &mut PlanExecState) -> String {
    let last_success = exec.step_output.iter().rev().find(|o| o.success);
    let answer = last_success.map(|o| o.answer.clone()).unwrap_or_default();
    let score = last_success.map(|o| o.rating).unwrap_or(0);
    exec.plan_summary = Some(PlanSummaryState {
        output: render_history(exec),
        answer: answer.clone(),
        score,
    });
    answer
}
