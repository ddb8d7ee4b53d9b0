//! Structured-output recovery from raw model text.
//!
//! Models are asked for JSON but return it in whatever wrapping they like,
//! so extraction tries, in order:
//! 1. the whole trimmed text as JSON,
//! 2. the first fenced code block that contains valid JSON,
//! 3. the first balanced `[...]` or `{...}` span that parses.
//!
//! Anything beyond that is a parse error; the caller may re-prompt once with
//! the error appended before giving up.

use serde_json::Value;
use thiserror::Error;

use crate::state::{PlanState, QAAnswerState, StepTaskState, TaskType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("no JSON value found in output")]
    NoJson,
    #[error("expected {expected}, got {got}")]
    WrongShape { expected: String, got: String },
    #[error("{0}")]
    Invalid(String),
}

/// Pull the first JSON value out of raw model output.
pub fn extract_structured(raw: &str) -> Result<Value, ParseError> {
    let trimmed = raw.trim();
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        return Ok(v);
    }
    if let Some(v) = first_fenced_json(trimmed) {
        return Ok(v);
    }
    if let Some(v) = first_balanced_json(trimmed) {
        return Ok(v);
    }
    Err(ParseError::NoJson)
}

fn first_fenced_json(text: &str) -> Option<Value> {
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        // Skip a language tag up to end of line.
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
        let body = &after[body_start..];
        let close = body.find("```")?;
        let candidate = body[..close].trim();
        if let Ok(v) = serde_json::from_str::<Value>(candidate) {
            return Some(v);
        }
        rest = &body[close + 3..];
    }
    None
}

fn first_balanced_json(text: &str) -> Option<Value> {
    let bytes = text.as_bytes();
    for (start, &b) in bytes.iter().enumerate() {
        let (open, close) = match b {
            b'[' => (b'[', b']'),
            b'{' => (b'{', b'}'),
            _ => continue,
        };
        let mut depth = 0usize;
        let mut in_string = false;
        let mut escaped = false;
        for (offset, &c) in bytes[start..].iter().enumerate() {
            if in_string {
                if escaped {
                    escaped = false;
                } else if c == b'\\' {
                    escaped = true;
                } else if c == b'"' {
                    in_string = false;
                }
                continue;
            }
            match c {
                b'"' => in_string = true,
                _ if c == open => depth += 1,
                _ if c == close => {
                    depth -= 1;
                    if depth == 0 {
                        let candidate = &text[start..start + offset + 1];
                        if let Ok(v) = serde_json::from_str::<Value>(candidate) {
                            return Some(v);
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    None
}

fn string_list(value: &Value) -> Option<Vec<String>> {
    value.as_array().map(|items| {
        items
            .iter()
            .map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect()
    })
}

/// Parse planner output: a bare list of step strings, or an object carrying
/// one under `step`/`steps`/`plan` (plus optional `analysis`). Steps are
/// trimmed, blanks dropped, and the list truncated to `max_steps`.
pub fn parse_plan(raw: &str, max_steps: usize) -> Result<PlanState, ParseError> {
    let value = extract_structured(raw)?;
    let (analysis, steps) = match &value {
        Value::Array(_) => (String::new(), string_list(&value)),
        Value::Object(map) => {
            let analysis = map
                .get("analysis")
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string();
            let steps = ["step", "steps", "plan"]
                .iter()
                .find_map(|k| map.get(*k))
                .and_then(string_list);
            (analysis, steps)
        }
        other => {
            return Err(ParseError::WrongShape {
                expected: "list of steps".to_string(),
                got: kind_of(other).to_string(),
            })
        }
    };
    let steps = steps.ok_or_else(|| ParseError::WrongShape {
        expected: "list of steps".to_string(),
        got: "object without step list".to_string(),
    })?;
    let mut steps: Vec<String> = steps
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if steps.is_empty() {
        return Err(ParseError::Invalid("plan has no non-blank steps".into()));
    }
    if steps.len() > max_steps {
        log::warn!("plan has {} steps; truncating to {max_steps}", steps.len());
        steps.truncate(max_steps);
    }
    Ok(PlanState { analysis, steps })
}

/// Parse step-definer output `{type, task}`. Unknown task types are coerced
/// to `search` so a run survives a sloppy model.
pub fn parse_step_task(raw: &str) -> Result<StepTaskState, ParseError> {
    let value = extract_structured(raw)?;
    let map = value.as_object().ok_or_else(|| ParseError::WrongShape {
        expected: "object with type and task".to_string(),
        got: kind_of(&value).to_string(),
    })?;
    let task = map
        .get("task")
        .or_else(|| map.get("query"))
        .and_then(|v| v.as_str())
        .map(|s| s.trim().to_string())
        .unwrap_or_default();
    if task.is_empty() {
        return Err(ParseError::Invalid("task text is blank".into()));
    }
    let raw_type = map
        .get("type")
        .or_else(|| map.get("task_type"))
        .and_then(|v| v.as_str())
        .unwrap_or("search");
    let task_type = match raw_type.trim().to_ascii_lowercase().as_str() {
        "search" => TaskType::Search,
        "aggregate" => TaskType::Aggregate,
        other => {
            log::warn!("unknown task type {other:?}; treating as search");
            TaskType::Search
        }
    };
    Ok(StepTaskState { task_type, task })
}

/// Case-insensitive prefix test for the extractor's no-information sentinel.
pub fn is_sentinel(text: &str) -> bool {
    let trimmed = text.trim();
    let prefix = "no related information";
    trimmed.len() >= prefix.len() && trimmed[..prefix.len()].eq_ignore_ascii_case(prefix)
}

/// Parsed extractor output: evidence notes, or the empty-evidence sentinel.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NoteList {
    pub notes: Vec<String>,
    pub is_empty_sentinel: bool,
}

impl NoteList {
    pub fn sentinel() -> Self {
        Self {
            notes: Vec::new(),
            is_empty_sentinel: true,
        }
    }

    pub fn from_notes(notes: Vec<String>) -> Self {
        Self {
            notes,
            is_empty_sentinel: false,
        }
    }
}

/// Parse extractor output. A bare sentinel line short-circuits; otherwise a
/// JSON list of notes (or `{notes: [...]}`) is expected. Sentinel-valued
/// entries inside the list count as no evidence, and a list with nothing
/// left collapses to the sentinel.
pub fn parse_notes(raw: &str) -> Result<NoteList, ParseError> {
    if is_sentinel(raw) {
        return Ok(NoteList::sentinel());
    }
    let value = extract_structured(raw)?;
    let list = match &value {
        Value::Array(_) => string_list(&value),
        Value::Object(map) => map.get("notes").and_then(string_list),
        Value::String(s) if is_sentinel(s) => return Ok(NoteList::sentinel()),
        other => {
            return Err(ParseError::WrongShape {
                expected: "list of notes".to_string(),
                got: kind_of(other).to_string(),
            })
        }
    };
    let list = list.ok_or_else(|| ParseError::WrongShape {
        expected: "list of notes".to_string(),
        got: "object without notes".to_string(),
    })?;
    let mut saw_sentinel = false;
    let notes: Vec<String> = list
        .into_iter()
        .map(|n| n.trim().to_string())
        .filter(|n| !n.is_empty())
        .filter(|n| {
            if is_sentinel(n) {
                saw_sentinel = true;
                false
            } else {
                true
            }
        })
        .collect();
    if notes.is_empty() && saw_sentinel {
        return Ok(NoteList::sentinel());
    }
    Ok(NoteList::from_notes(notes))
}

fn yes_like(value: &Value) -> bool {
    match value {
        Value::Bool(b) => *b,
        Value::String(s) => matches!(
            s.trim().to_ascii_lowercase().as_str(),
            "yes" | "y" | "true" | "success"
        ),
        _ => false,
    }
}

/// Parse QA output `{analysis, answer, success, rating}`. `success` is
/// normalized to a boolean (unparseable → false). A successful answer must
/// be non-blank; that combination failing to hold is a parse error so no
/// half-filled answer state escapes.
pub fn parse_qa(raw: &str) -> Result<QAAnswerState, ParseError> {
    let value = extract_structured(raw)?;
    let map = value.as_object().ok_or_else(|| ParseError::WrongShape {
        expected: "object with answer and success".to_string(),
        got: kind_of(&value).to_string(),
    })?;
    let analysis = map
        .get("analysis")
        .and_then(|v| v.as_str())
        .unwrap_or_default()
        .to_string();
    let answer = map
        .get("answer")
        .and_then(|v| v.as_str())
        .unwrap_or_default()
        .trim()
        .to_string();
    let success = map.get("success").map(yes_like).unwrap_or(false);
    let rating = match map.get("rating") {
        None | Some(Value::Null) => 0,
        Some(Value::Number(n)) => n
            .as_i64()
            .ok_or_else(|| ParseError::Invalid(format!("rating {n} is not an integer")))?,
        Some(Value::String(s)) => s
            .trim()
            .parse::<i64>()
            .map_err(|_| ParseError::Invalid(format!("rating {s:?} is not an integer")))?,
        Some(other) => {
            return Err(ParseError::Invalid(format!(
                "rating has type {}",
                kind_of(other)
            )))
        }
    };
    if success && answer.is_empty() {
        return Err(ParseError::Invalid(
            "success is yes but answer is blank".into(),
        ));
    }
    Ok(QAAnswerState {
        analysis,
        answer,
        success,
        rating,
    })
}

fn kind_of(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}
