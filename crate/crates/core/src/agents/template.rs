//! Prompt templates with named `{slot}` placeholders.
//!
//! Templates live in plain-text files shaped as
//!
//! ```text
//! System: <system text, possibly multi-line>
//!
//! User: <user text, possibly multi-line>
//! ```
//!
//! Rendering is strict both ways: every slot in the template must be bound
//! and every binding must name a slot, so a typo in either place fails
//! loudly instead of producing a silently wrong prompt. Rendering the same
//! bindings twice yields identical bytes.

use std::collections::BTreeSet;
use std::path::Path;

use super::AgentError;

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub name: String,
    pub system: String,
    pub user: String,
}

impl PromptTemplate {
    /// Split a template file at the first line starting with `User:`.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, AgentError> {
        let name = name.into();
        let mut system_lines: Vec<&str> = Vec::new();
        let mut user_lines: Vec<&str> = Vec::new();
        let mut in_user = false;
        for line in text.lines() {
            if !in_user {
                if let Some(rest) = line.strip_prefix("User:") {
                    in_user = true;
                    let rest = rest.strip_prefix(' ').unwrap_or(rest);
                    if !rest.is_empty() {
                        user_lines.push(rest);
                    }
                    continue;
                }
                system_lines.push(line);
            } else {
                user_lines.push(line);
            }
        }
        if !in_user {
            return Err(AgentError::Template(format!(
                "template {name:?} has no User: section"
            )));
        }
        let mut system = system_lines.join("\n");
        if let Some(rest) = system.strip_prefix("System:") {
            system = rest.strip_prefix(' ').unwrap_or(rest).to_string();
        }
        let system = system.trim_end_matches('\n').to_string();
        let user = user_lines.join("\n").trim_end_matches('\n').to_string();
        if system.trim().is_empty() || user.trim().is_empty() {
            return Err(AgentError::Template(format!(
                "template {name:?} has an empty section"
            )));
        }
        Ok(Self { name, system, user })
    }

    pub fn from_path(name: impl Into<String>, path: impl AsRef<Path>) -> Result<Self, AgentError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            AgentError::Template(format!("reading {}: {e}", path.as_ref().display()))
        })?;
        Self::parse(name, &text)
    }

    pub fn render_system(&self, bindings: &[(&str, &str)]) -> Result<String, AgentError> {
        render(&self.name, &self.system, bindings)
    }

    pub fn render_user(&self, bindings: &[(&str, &str)]) -> Result<String, AgentError> {
        render(&self.name, &self.user, bindings)
    }
}

fn slots_of(text: &str) -> BTreeSet<String> {
    let mut slots = BTreeSet::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(close) = text[i + 1..].find('}') {
                let inner = &text[i + 1..i + 1 + close];
                if !inner.is_empty()
                    && inner
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    slots.insert(inner.to_string());
                    i += close + 2;
                    continue;
                }
            }
        }
        i += 1;
    }
    slots
}

fn render(name: &str, text: &str, bindings: &[(&str, &str)]) -> Result<String, AgentError> {
    let slots = slots_of(text);
    for (key, _) in bindings {
        if !slots.contains(*key) {
            return Err(AgentError::Template(format!(
                "template {name:?} has no slot {{{key}}}"
            )));
        }
    }
    // Single pass over the template so slot-shaped text inside a bound value
    // is never re-expanded.
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let (before, after_open) = rest.split_at(open);
        out.push_str(before);
        match after_open[1..].find('}') {
            Some(close) => {
                let inner = &after_open[1..1 + close];
                if slots.contains(inner) {
                    let value = bindings
                        .iter()
                        .find(|(k, _)| *k == inner)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| {
                            AgentError::Template(format!(
                                "template {name:?} slot {{{inner}}} is unbound"
                            ))
                        })?;
                    out.push_str(value);
                    rest = &after_open[close + 2..];
                } else {
                    out.push('{');
                    rest = &after_open[1..];
                }
            }
            None => {
                out.push_str(after_open);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

/// A worked planner example injected as a user/assistant exchange.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FewShotExample {
    pub question: String,
    pub response: String,
}

/// The four agent templates plus planner exemplars.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    pub planner: PromptTemplate,
    pub step_definer: PromptTemplate,
    pub extractor: PromptTemplate,
    pub qa: PromptTemplate,
    pub planner_fewshot: Vec<FewShotExample>,
}

fn parse_fewshot(text: &str) -> Result<Vec<FewShotExample>, AgentError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ex: FewShotExample = serde_json::from_str(line).map_err(|e| {
            AgentError::Template(format!("fewshot line {}: {e}", lineno + 1))
        })?;
        out.push(ex);
    }
    Ok(out)
}

impl TemplateSet {
    /// The templates compiled into the library.
    pub fn builtin() -> Self {
        let planner =
            PromptTemplate::parse("planner", include_str!("../../prompts/planner.txt"))
                .expect("builtin planner template");
        let step_definer = PromptTemplate::parse(
            "step_definer",
            include_str!("../../prompts/step_definer.txt"),
        )
        .expect("builtin step_definer template");
        let extractor =
            PromptTemplate::parse("extractor", include_str!("../../prompts/extractor.txt"))
                .expect("builtin extractor template");
        let qa = PromptTemplate::parse("qa", include_str!("../../prompts/qa.txt"))
            .expect("builtin qa template");
        let planner_fewshot = parse_fewshot(include_str!("../../prompts/planner_fewshot.jsonl"))
            .expect("builtin fewshot file");
        Self {
            planner,
            step_definer,
            extractor,
            qa,
            planner_fewshot,
        }
    }

    /// Load `planner.txt`, `step_definer.txt`, `extractor.txt`, `qa.txt` and
    /// optionally `planner_fewshot.jsonl` from a directory.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, AgentError> {
        let dir = dir.as_ref();
        let fewshot_path = dir.join("planner_fewshot.jsonl");
        let planner_fewshot = if fewshot_path.exists() {
            let text = std::fs::read_to_string(&fewshot_path)
                .map_err(|e| AgentError::Template(format!("reading fewshot: {e}")))?;
            parse_fewshot(&text)?
        } else {
            Vec::new()
        };
        Ok(Self {
            planner: PromptTemplate::from_path("planner", dir.join("planner.txt"))?,
            step_definer: PromptTemplate::from_path("step_definer", dir.join("step_definer.txt"))?,
            extractor: PromptTemplate::from_path("extractor", dir.join("extractor.txt"))?,
            qa: PromptTemplate::from_path("qa", dir.join("qa.txt"))?,
            planner_fewshot,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_splits_system_and_user() {
        let t = PromptTemplate::parse("t", "System: do things\n\nUser: {q}\n").unwrap();
        assert_eq!(t.system, "do things");
        assert_eq!(t.user, "{q}");
    }

    #[test]
    fn rendering_is_byte_deterministic() {
        let t = PromptTemplate::parse("t", "System: a {x} b\nUser: {x} and {y}").unwrap();
        let once = t.render_user(&[("x", "1"), ("y", "2")]).unwrap();
        let twice = t.render_user(&[("x", "1"), ("y", "2")]).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once, "1 and 2");
        assert_eq!(t.render_system(&[("x", "1")]).unwrap(), "a 1 b");
    }

    #[test]
    fn unknown_binding_and_unbound_slot_fail() {
        let t = PromptTemplate::parse("t", "System: s\nUser: {q}").unwrap();
        assert!(t.render_user(&[("q", "v"), ("bogus", "v")]).is_err());
        assert!(t.render_user(&[]).is_err());
    }

    #[test]
    fn bound_values_are_not_re_expanded() {
        let t = PromptTemplate::parse("t", "System: s\nUser: {a} then {b}").unwrap();
        let out = t.render_user(&[("a", "literal {b} inside"), ("b", "two")]).unwrap();
        assert_eq!(out, "literal {b} inside then two");
    }

    #[test]
    fn builtin_templates_expose_expected_slots() {
        let set = TemplateSet::builtin();
        assert!(set.planner.user.contains("{Question}"));
        assert!(set.step_definer.user.contains("{plan}"));
        assert!(set.step_definer.user.contains("{cur_step}"));
        assert!(set.step_definer.user.contains("{memory}"));
        assert!(set.extractor.user.contains("{passage}"));
        assert!(set.extractor.user.contains("{question}"));
        assert!(set.qa.user.contains("{context}"));
        assert!(set.qa.user.contains("{question}"));
        assert_eq!(set.planner_fewshot.len(), 2);
    }
}
