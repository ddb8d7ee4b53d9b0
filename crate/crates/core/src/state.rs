//! Shared state exchanged between agents during a run.
//!
//! Every type here is a plain serializable record. A run mutates exactly one
//! [`PlanExecState`] at a time through [`PlanExecState::append_step`], which
//! keeps the four per-step ledgers (`step_question`, `step_output`,
//! `step_docs_ids`, `step_notes`) aligned: one entry each per completed step,
//! never more entries than the plan has steps, earlier entries never touched.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rendered in place of a step history when no step has finished yet.
pub const EMPTY_HISTORY: &str = "No steps completed yet.";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("append beyond plan: plan has {plan_len} steps, {completed} already completed")]
    AppendBeyondPlan { plan_len: usize, completed: usize },
    #[error("per-step ledgers misaligned: question={questions} output={outputs} docs={docs} notes={notes}")]
    Misaligned {
        questions: usize,
        outputs: usize,
        docs: usize,
        notes: usize,
    },
}

/// The planner's decomposition of the original question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanState {
    pub analysis: String,
    /// Ordered sub-task descriptions, one per step.
    #[serde(rename = "step")]
    pub steps: Vec<String>,
}

/// Whether a step needs fresh retrieval or only aggregates prior results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskType {
    Search,
    Aggregate,
}

impl std::fmt::Display for TaskType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskType::Search => f.write_str("search"),
            TaskType::Aggregate => f.write_str("aggregate"),
        }
    }
}

/// The step definer's concrete instruction for one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTaskState {
    #[serde(rename = "type")]
    pub task_type: TaskType,
    /// Detailed subquery (search) or aggregation instruction (aggregate).
    pub task: String,
}

/// One agent answer. `success` is normalized to a boolean at parse time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAAnswerState {
    pub analysis: String,
    pub answer: String,
    pub success: bool,
    pub rating: i64,
}

impl QAAnswerState {
    /// A failed answer carrying only diagnostic analysis.
    pub fn failed(analysis: impl Into<String>) -> Self {
        Self {
            analysis: analysis.into(),
            answer: String::new(),
            success: false,
            rating: 0,
        }
    }
}

/// Digest of a finished plan execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSummaryState {
    pub output: String,
    pub answer: String,
    pub score: i64,
}

/// Full record of executing one plan; doubles as the history H_i that
/// conditions later steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanExecState {
    pub original_question: String,
    pub plan: Vec<String>,
    pub step_question: Vec<StepTaskState>,
    pub step_output: Vec<QAAnswerState>,
    pub step_docs_ids: Vec<Vec<String>>,
    pub step_notes: Vec<Vec<String>>,
    pub plan_summary: Option<PlanSummaryState>,
    pub stop: bool,
}

impl PlanExecState {
    pub fn new(original_question: impl Into<String>, plan: Vec<String>) -> Self {
        Self {
            original_question: original_question.into(),
            plan,
            step_question: Vec::new(),
            step_output: Vec::new(),
            step_docs_ids: Vec::new(),
            step_notes: Vec::new(),
            plan_summary: None,
            stop: false,
        }
    }

    /// Number of completed steps. Panics in debug builds if the ledgers have
    /// drifted; release builds report the question ledger.
    pub fn completed_steps(&self) -> usize {
        debug_assert!(self.check_alignment().is_ok());
        self.step_question.len()
    }

    pub fn is_complete(&self) -> bool {
        self.completed_steps() >= self.plan.len()
    }

    pub fn check_alignment(&self) -> Result<(), StateError> {
        let (q, o, d, n) = (
            self.step_question.len(),
            self.step_output.len(),
            self.step_docs_ids.len(),
            self.step_notes.len(),
        );
        if q == o && o == d && d == n && q <= self.plan.len() {
            Ok(())
        } else {
            Err(StateError::Misaligned {
                questions: q,
                outputs: o,
                docs: d,
                notes: n,
            })
        }
    }

    /// Record one completed step. All four ledgers grow by exactly one entry;
    /// appending past the end of the plan is an orchestration bug and is
    /// rejected.
    pub fn append_step(
        &mut self,
        task: StepTaskState,
        out: QAAnswerState,
        ids: Vec<String>,
        notes: Vec<String>,
    ) -> Result<(), StateError> {
        self.check_alignment()?;
        if self.step_question.len() >= self.plan.len() {
            return Err(StateError::AppendBeyondPlan {
                plan_len: self.plan.len(),
                completed: self.step_question.len(),
            });
        }
        self.step_question.push(task);
        self.step_output.push(out);
        self.step_docs_ids.push(ids);
        self.step_notes.push(notes);
        Ok(())
    }
}

/// Top-level record of one engine run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphState {
    pub original_question: String,
    pub plan: Vec<String>,
    pub past_exp: Vec<PlanExecState>,
    pub final_answer: String,
}

impl GraphState {
    pub fn new(original_question: impl Into<String>) -> Self {
        Self {
            original_question: original_question.into(),
            plan: Vec::new(),
            past_exp: Vec::new(),
            final_answer: String::new(),
        }
    }
}

/// Working state of a single retrieval-and-answer step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RagState {
    pub question: String,
    pub documents: Vec<String>,
    pub doc_ids: Vec<String>,
    pub notes: Vec<String>,
    pub final_raw_answer: Option<QAAnswerState>,
}

impl RagState {
    /// Pair retrieved passages with their ids. Counts must match and ids must
    /// be distinct within one retrieval.
    pub fn new(
        question: impl Into<String>,
        documents: Vec<String>,
        doc_ids: Vec<String>,
    ) -> Result<Self, StateError> {
        if documents.len() != doc_ids.len() {
            return Err(StateError::Misaligned {
                questions: 0,
                outputs: 0,
                docs: doc_ids.len(),
                notes: documents.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for id in &doc_ids {
            if !seen.insert(id) {
                return Err(StateError::Misaligned {
                    questions: 0,
                    outputs: 0,
                    docs: doc_ids.len(),
                    notes: documents.len(),
                });
            }
        }
        Ok(Self {
            question: question.into(),
            documents,
            doc_ids,
            notes: Vec::new(),
            final_raw_answer: None,
        })
    }
}

/// Deterministic rendering of the finished steps, used to fill the step
/// definer's memory slot and the plan summary. One line per completed step,
/// in execution order.
pub fn render_history(exec: &PlanExecState) -> String {
    let completed = exec.completed_steps();
    if completed == 0 {
        return EMPTY_HISTORY.to_string();
    }
    let mut lines = Vec::with_capacity(completed);
    for i in 0..completed {
        lines.push(format!(
            "Step {}: {} → Answer: {}",
            i + 1,
            exec.step_question[i].task,
            exec.step_output[i].answer
        ));
    }
    lines.join("\n")
}

/// The per-step history lines individually, for contexts that want one note
/// per finished step rather than a single block.
pub fn history_lines(exec: &PlanExecState) -> Vec<String> {
    (0..exec.completed_steps())
        .map(|i| {
            format!(
                "Step {}: {} → Answer: {}",
                i + 1,
                exec.step_question[i].task,
                exec.step_output[i].answer
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn search_task(text: &str) -> StepTaskState {
        StepTaskState {
            task_type: TaskType::Search,
            task: text.to_string(),
        }
    }

    fn ok_answer(text: &str) -> QAAnswerState {
        QAAnswerState {
            analysis: String::new(),
            answer: text.to_string(),
            success: true,
            rating: 4,
        }
    }

    #[test]
    fn render_history_empty_uses_sentinel_line() {
        let exec = PlanExecState::new("q", vec!["s1".into()]);
        assert_eq!(render_history(&exec), "No steps completed yet.");
    }

    #[test]
    fn render_history_contains_task_and_answer_in_order() {
        let mut exec = PlanExecState::new("q", vec!["s1".into(), "s2".into()]);
        exec.append_step(
            search_task("Who is Edward De Vere, 17th Earl of Oxford's father?"),
            ok_answer("John de Vere, 16th Earl of Oxford"),
            vec!["129773-0".into()],
            vec!["note".into()],
        )
        .unwrap();
        let rendered = render_history(&exec);
        let task_at = rendered
            .find("Who is Edward De Vere, 17th Earl of Oxford's father?")
            .unwrap();
        let answer_at = rendered.find("John de Vere, 16th Earl of Oxford").unwrap();
        assert!(task_at < answer_at);
    }

    #[test]
    fn render_history_is_deterministic_and_ordered() {
        let mut exec = PlanExecState::new("q", vec!["s1".into(), "s2".into()]);
        exec.append_step(search_task("first task"), ok_answer("a1"), vec![], vec![])
            .unwrap();
        exec.append_step(search_task("second task"), ok_answer("a2"), vec![], vec![])
            .unwrap();
        let once = render_history(&exec);
        let twice = render_history(&exec);
        assert_eq!(once, twice);
        assert!(once.find("first task").unwrap() < once.find("second task").unwrap());
        assert!(once.starts_with("Step 1:"));
    }

    #[test]
    fn append_grows_all_ledgers_by_one() {
        let mut exec = PlanExecState::new("q", vec!["s1".into()]);
        exec.append_step(search_task("t"), ok_answer("a"), vec!["d-0".into()], vec![])
            .unwrap();
        assert_eq!(exec.step_question.len(), 1);
        assert_eq!(exec.step_output.len(), 1);
        assert_eq!(exec.step_docs_ids.len(), 1);
        assert_eq!(exec.step_notes.len(), 1);
        assert!(exec.is_complete());
    }

    #[test]
    fn append_beyond_plan_is_rejected() {
        let mut exec = PlanExecState::new("q", vec!["s1".into()]);
        exec.append_step(search_task("t"), ok_answer("a"), vec![], vec![])
            .unwrap();
        let err = exec
            .append_step(search_task("t2"), ok_answer("a2"), vec![], vec![])
            .unwrap_err();
        assert_eq!(
            err,
            StateError::AppendBeyondPlan {
                plan_len: 1,
                completed: 1
            }
        );
        // Rejected append leaves the ledgers untouched.
        assert_eq!(exec.step_question.len(), 1);
    }

    #[test]
    fn sequential_appends_leave_earlier_entries_unchanged() {
        let mut exec = PlanExecState::new("q", vec!["s1".into(), "s2".into(), "s3".into()]);
        exec.append_step(search_task("t1"), ok_answer("a1"), vec![], vec![])
            .unwrap();
        let first_snapshot = serde_json::to_string(&(
            &exec.step_question[0],
            &exec.step_output[0],
            &exec.step_docs_ids[0],
            &exec.step_notes[0],
        ))
        .unwrap();
        exec.append_step(search_task("t2"), ok_answer("a2"), vec![], vec![])
            .unwrap();
        exec.append_step(search_task("t3"), ok_answer("a3"), vec![], vec![])
            .unwrap();
        assert_eq!(exec.step_question.len(), 3);
        let first_after = serde_json::to_string(&(
            &exec.step_question[0],
            &exec.step_output[0],
            &exec.step_docs_ids[0],
            &exec.step_notes[0],
        ))
        .unwrap();
        assert_eq!(first_snapshot, first_after);
    }

    #[test]
    fn rag_state_rejects_mismatched_or_duplicate_ids() {
        assert!(RagState::new("q", vec!["a".into()], vec![]).is_err());
        assert!(
            RagState::new("q", vec!["a".into(), "b".into()], vec!["1".into(), "1".into()])
                .is_err()
        );
        assert!(
            RagState::new("q", vec!["a".into(), "b".into()], vec!["1".into(), "2".into()])
                .is_ok()
        );
    }

    #[test]
    fn wire_field_names_are_the_short_forms() {
        let plan = PlanState {
            analysis: "a".into(),
            steps: vec!["s".into()],
        };
        let json = serde_json::to_value(&plan).unwrap();
        assert!(json.get("step").is_some());
        let task = search_task("t");
        let json = serde_json::to_value(&task).unwrap();
        assert_eq!(json.get("type").unwrap(), "search");
    }
}
