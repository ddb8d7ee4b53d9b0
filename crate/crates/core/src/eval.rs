//! Dataset loading, answer metrics, and batch benchmark reports.
//!
//! Exact match uses SQuAD-style normalization (lowercase, strip punctuation,
//! drop the articles a/an/the, collapse whitespace) — the de-facto standard
//! for open-domain QA. Absolute scores depend on this choice, so it is
//! documented here and pinned by tests rather than left implicit.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orchestrator::Engine;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset line {line}: {detail}")]
    Dataset { line: usize, detail: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid gold label {0:?} (expected SUPPORTS or REFUTES)")]
    BadGoldLabel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One benchmark item. `gold_answers` holds every accepted alias.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAExample {
    pub id: String,
    pub question: String,
    pub gold_answers: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct WireExample {
    id: String,
    #[serde(default)]
    question: Option<String>,
    #[serde(default)]
    claim: Option<String>,
    answers: Vec<String>,
}

/// Load JSON Lines of `{id, question (or claim), answers: [...]}`.
pub fn load_dataset_jsonl(path: impl AsRef<Path>) -> Result<Vec<QAExample>, EvalError> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireExample = serde_json::from_str(line).map_err(|e| EvalError::Dataset {
            line: lineno + 1,
            detail: e.to_string(),
        })?;
        let question = wire.question.or(wire.claim).ok_or(EvalError::Dataset {
            line: lineno + 1,
            detail: "neither question nor claim present".to_string(),
        })?;
        if wire.answers.is_empty() {
            return Err(EvalError::Dataset {
                line: lineno + 1,
                detail: "answers list is empty".to_string(),
            });
        }
        out.push(QAExample {
            id: wire.id,
            question,
            gold_answers: wire.answers,
        });
    }
    if out.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    Ok(out)
}

/// Lowercase, strip punctuation, remove the articles a/an/the, collapse
/// whitespace — in that order, with punctuation deleted outright so
/// "don't" becomes "dont".
pub fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let no_punct: String = lowered
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .collect();
    no_punct
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// True iff the normalized prediction equals any normalized gold answer.
pub fn exact_match(prediction: &str, golds: &[String]) -> bool {
    let p = normalize(prediction);
    golds.iter().any(|g| normalize(g) == p)
}

/// Fact-verification accuracy on a two-label task. The gold label must be
/// SUPPORTS or REFUTES; an unrecognized prediction counts as wrong and is
/// logged.
pub fn label_accuracy(prediction: &str, gold_label: &str) -> Result<bool, EvalError> {
    let gold = gold_label.trim().to_uppercase();
    if gold != "SUPPORTS" && gold != "REFUTES" {
        return Err(EvalError::BadGoldLabel(gold_label.to_string()));
    }
    let pred = prediction.trim().to_uppercase();
    if pred != "SUPPORTS" && pred != "REFUTES" {
        log::warn!("unrecognized predicted label {prediction:?}; counted as wrong");
        return Ok(false);
    }
    Ok(pred == gold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Em,
    Acc,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::Em => "EM",
            Metric::Acc => "Acc",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Ok(Metric::Em),
            "acc" | "accuracy" => Ok(Metric::Acc),
            other => Err(format!("unknown metric {other:?} (expected em or acc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub prediction: String,
    pub matched: bool,
    pub latency_ms: u64,
    pub steps_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub n: usize,
    pub metric: Metric,
    pub score: f64,
    pub records: Vec<EvalRecord>,
}

impl EvalReport {
    pub fn matched_count(&self) -> usize {
        self.records.iter().filter(|r| r.matched).count()
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} {:.3} on {} examples",
            self.metric.label(),
            self.score,
            self.n
        )
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Bar-chart-ready CSV: one row per report.
    pub fn to_csv(&self) -> String {
        format!(
            "dataset,metric,score,n\n{},{},{:.6},{}\n",
            self.dataset,
            self.metric.label(),
            self.score,
            self.n
        )
    }

    /// Plain-text table of per-example results.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:<8} {:<6} {:>8}  prediction\n",
            "id", "matched", "steps", "ms"
        ));
        for r in &self.records {
            out.push_str(&format!(
                "{:<24} {:<8} {:<6} {:>8}  {}\n",
                r.id, r.matched, r.steps_used, r.latency_ms, r.prediction
            ));
        }
        out.push_str(&self.summary_line());
        out.push('\n');
        out
    }
}

/// Run the engine once per example with bounded parallelism and aggregate.
/// Per-example failures (aborted runs, engine errors) are recorded as
/// unmatched; nothing aborts the batch. Records are sorted by id so the
/// report bytes do not depend on dataset order.
pub fn run_benchmark(
    examples: &[QAExample],
    engine: &Engine,
    metric: Metric,
    parallelism: usize,
    dataset_name: &str,
) -> Result<EvalReport, EvalError> {
    if examples.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let parallelism = parallelism.max(1).min(examples.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<EvalRecord>>> = Mutex::new(vec![None; examples.len()]);

    std::thread::scope(|scope| {
        for _ in 0..parallelism {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= examples.len() {
                    break;
                }
                let ex = &examples[i];
                let record = evaluate_one(ex, engine, metric);
                slots.lock().unwrap()[i] = Some(record);
            });
        }
    });

    let mut records: Vec<EvalRecord> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every example evaluated"))
        .collect();
    records.sort_by(|a, b| a.id.cmp(&b.id));
    let n = records.len();
    let matched = records.iter().filter(|r| r.matched).count();
    Ok(EvalReport {
        dataset: dataset_name.to_string(),
        n,
        metric,
        score: matched as f64 / n as f64,
        records,
    })
}

fn evaluate_one(ex: &QAExample, engine: &Engine, metric: Metric) -> EvalRecord {
    match engine.run(&ex.question) {
        Ok(transcript) => {
            let prediction = transcript.graph_state.final_answer.clone();
            let matched = match metric {
                Metric::Em => exact_match(&prediction, &ex.gold_answers),
                Metric::Acc => label_accuracy(&prediction, &ex.gold_answers[0]).unwrap_or(false),
            };
            let steps_used = transcript
                .graph_state
                .past_exp
                .last()
                .map(|e| e.step_question.len())
                .unwrap_or(0);
            EvalRecord {
                id: ex.id.clone(),
                prediction,
                matched,
                latency_ms: transcript.total_ms,
                steps_used,
            }
        }
        Err(e) => {
            log::warn!("example {} failed: {e}", ex.id);
            EvalRecord {
                id: ex.id.clone(),
                prediction: String::new(),
                matched: false,
                latency_ms: 0,
                steps_used: 0,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_applies_all_four_rules() {
        assert_eq!(normalize("The Lodge."), "lodge");
        assert_eq!(normalize(""), "");
        assert_eq!(
            normalize("John de Vere, 15th Earl of Oxford"),
            "john de vere 15th earl of oxford"
        );
        assert_eq!(normalize("An  Apple   a Day!"), "apple day");
        assert_eq!(normalize("a an the"), "");
        assert_eq!(normalize("don't"), "dont");
        assert_eq!(normalize("QUICK-BROWN fox"), "quickbrown fox");
    }

    #[test]
    fn exact_match_is_normalization_equality_over_aliases() {
        let golds = vec!["John de Vere, 15th Earl of Oxford".to_string()];
        assert!(exact_match("John de Vere, 15th Earl of Oxford", &golds));
        assert!(exact_match("john de vere 15th earl of oxford", &golds));
        assert!(!exact_match("john de vere 16th earl of oxford", &golds));
        let aliases = vec!["NYC".to_string(), "New York City".to_string()];
        assert!(exact_match("new york city", &aliases));
    }

    #[test]
    fn label_accuracy_cases() {
        assert!(label_accuracy("SUPPORTS", "supports").unwrap());
        assert!(!label_accuracy("REFUTES", "SUPPORTS").unwrap());
        assert!(!label_accuracy("maybe", "SUPPORTS").unwrap());
        assert!(label_accuracy("x", "UNKNOWN").is_err());
    }

    #[test]
    fn metric_parses_from_str() {
        assert_eq!("em".parse::<Metric>().unwrap(), Metric::Em);
        assert_eq!("ACC".parse::<Metric>().unwrap(), Metric::Acc);
        assert!("f1".parse::<Metric>().is_err());
    }
}
