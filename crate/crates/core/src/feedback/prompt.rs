//! Prompt templates and placeholder substitution.

use std::collections::BTreeMap;
use std::fmt;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROMPT_VERSION: &str = "1.0.0";

static PLACEHOLDER: Lazy<Regex> = Lazy::new(|| Regex::new(r"\{([a-z_]+)\}").unwrap());

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("no input supplied for placeholder {{{0}}}")]
    MissingPlaceholderInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    PairFindingsDescriptions,
    DraftDiagnosis,
    PairDiffSummary,
    AggregateErrors,
}

impl TemplateId {
    pub const ALL: [TemplateId; 4] = [
        TemplateId::PairFindingsDescriptions,
        TemplateId::DraftDiagnosis,
        TemplateId::PairDiffSummary,
        TemplateId::AggregateErrors,
    ];

    fn builtin_body(self) -> &'static str {
        match self {
            TemplateId::PairFindingsDescriptions => {
                include_str!("../../data/prompts/pair_findings_descriptions.txt")
            }
            TemplateId::DraftDiagnosis => include_str!("../../data/prompts/draft_diagnosis.txt"),
            TemplateId::PairDiffSummary => include_str!("../../data/prompts/pair_diff_summary.txt"),
            TemplateId::AggregateErrors => include_str!("../../data/prompts/aggregate_errors.txt"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TemplateId::PairFindingsDescriptions => "pair_findings_descriptions",
            TemplateId::DraftDiagnosis => "draft_diagnosis",
            TemplateId::PairDiffSummary => "pair_diff_summary",
            TemplateId::AggregateErrors => "aggregate_errors",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub version: String,
    pub body: String,
}

impl PromptTemplate {
    pub fn builtin(id: TemplateId) -> Self {
        PromptTemplate {
            id,
            version: PROMPT_VERSION.to_string(),
            body: id.builtin_body().to_string(),
        }
    }

    pub fn new(id: TemplateId, body: impl Into<String>) -> Self {
        PromptTemplate {
            id,
            version: PROMPT_VERSION.to_string(),
            body: body.into(),
        }
    }

    /// Placeholder names in order of appearance (with repeats).
    pub fn placeholders(&self) -> Vec<&str> {
        PLACEHOLDER
            .captures_iter(&self.body)
            .map(|c| c.get(1).unwrap().as_str())
            .collect()
    }

    /// Recovers placeholder values from a prompt rendered with this template.
    /// Interior values end at the first occurrence of the following fixed text.
    /// Returns `None` if the fixed text does not line up.
    pub fn extract(&self, rendered: &str) -> Option<BTreeMap<String, String>> {
        let mut literals = Vec::new();
        let mut names = Vec::new();
        let mut last = 0;
        for c in PLACEHOLDER.captures_iter(&self.body) {
            let m = c.get(0).unwrap();
            literals.push(&self.body[last..m.start()]);
            names.push(c[1].to_string());
            last = m.end();
        }
        let tail = &self.body[last..];
        let mut rest = rendered.strip_prefix(literals.first().copied().unwrap_or(""))?;
        if names.is_empty() {
            return (rest == tail).then(BTreeMap::new);
        }
        rest = rest.strip_suffix(tail)?;
        let mut out = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            let value = match literals.get(i + 1) {
                Some(lit) => {
                    let at = rest.find(lit)?;
                    let v = &rest[..at];
                    rest = &rest[at + lit.len()..];
                    v
                }
                None => rest,
            };
            out.insert(name.clone(), value.to_string());
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PromptInput<'a> {
    Pair { final_text: &'a str, draft_text: &'a str },
    Draft { draft_text: &'a str },
    Summaries(&'a [String]),
}

impl PromptInput<'_> {
    fn value(&self, name: &str) -> Option<String> {
        match (self, name) {
            (PromptInput::Pair { final_text, .. }, "raw_report_final") => Some(final_text.to_string()),
            (PromptInput::Pair { draft_text, .. }, "raw_report_draft")
            | (PromptInput::Draft { draft_text }, "raw_report_draft") => Some(draft_text.to_string()),
            (PromptInput::Summaries(list), "summaries") if !list.is_empty() => Some(format_summaries(list)),
            _ => None,
        }
    }
}

/// Numbered list in the `1, ...` form used by the aggregation prompt.
pub fn format_summaries(summaries: &[String]) -> String {
    summaries
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}, {}", i + 1, s.trim()))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Single-pass substitution: text inserted for one placeholder is never
/// rescanned, so report text containing `{...}` survives verbatim.
pub fn render_prompt(template: &PromptTemplate, input: PromptInput<'_>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.body.len() + 4096);
    let mut last = 0;
    for c in PLACEHOLDER.captures_iter(&template.body) {
        let m = c.get(0).unwrap();
        let name = &c[1];
        let value = input
            .value(name)
            .ok_or_else(|| PromptError::MissingPlaceholderInput(name.to_string()))?;
        out.push_str(&template.body[last..m.start()]);
        out.push_str(&value);
        last = m.end();
    }
    out.push_str(&template.body[last..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FINAL: &str = include_str!("../../tests/fixtures/example1_attending.txt");
    const DRAFT: &str = include_str!("../../tests/fixtures/example1_resident.txt");

    #[test]
    fn pair_prompt_has_all_parts() {
        let t = PromptTemplate::builtin(TemplateId::PairFindingsDescriptions);
        let out = render_prompt(&t, PromptInput::Pair { final_text: FINAL, draft_text: DRAFT }).unwrap();
        for part in ["PART 1: Task Statement", "PART 2:", "PART 3:", "Part 4", "Example 1 INPUT", "Part 5: Request"] {
            assert!(out.contains(part), "missing {part}");
        }
        assert!(out.contains(&format!("Attending physician's report: {FINAL}")));
        assert!(out.contains(&format!("Radiology resident's report: {DRAFT}")));
        assert!(!PLACEHOLDER.is_match(&out));
    }

    #[test]
    fn diagnosis_prompt_ends_with_draft() {
        let t = PromptTemplate::builtin(TemplateId::DraftDiagnosis);
        let out = render_prompt(&t, PromptInput::Draft { draft_text: DRAFT }).unwrap();
        assert!(out.trim_end().ends_with(&format!("Analyze the following report: {}", DRAFT.trim_end())));
    }

    #[test]
    fn empty_summaries_are_missing_input() {
        let t = PromptTemplate::builtin(TemplateId::AggregateErrors);
        assert_eq!(
            render_prompt(&t, PromptInput::Summaries(&[])),
            Err(PromptError::MissingPlaceholderInput("summaries".into()))
        );
    }

    #[test]
    fn wrong_input_kind_is_missing_input() {
        let t = PromptTemplate::builtin(TemplateId::PairDiffSummary);
        assert_eq!(
            render_prompt(&t, PromptInput::Draft { draft_text: "x" }),
            Err(PromptError::MissingPlaceholderInput("raw_report_final".into()))
        );
    }

    #[test]
    fn summaries_are_numbered() {
        let s = vec!["- missed cyst".to_string(), "- wrong score".to_string()];
        assert_eq!(format_summaries(&s), "1, - missed cyst\n\n2, - wrong score");
    }

    #[test]
    fn braces_in_report_are_not_rescanned() {
        let t = PromptTemplate::new(TemplateId::PairDiffSummary, "A: {raw_report_final}\nB: {raw_report_draft}");
        let out = render_prompt(&t, PromptInput::Pair { final_text: "{raw_report_draft}", draft_text: "d" }).unwrap();
        assert_eq!(out, "A: {raw_report_draft}\nB: d");
    }

    proptest! {
        #[test]
        fn render_then_extract(final_text in "\\PC{0,200}", draft_text in "\\PC{0,200}") {
            let t = PromptTemplate::builtin(TemplateId::PairFindingsDescriptions);
            let out = render_prompt(&t, PromptInput::Pair { final_text: &final_text, draft_text: &draft_text }).unwrap();
            let got = t.extract(&out).unwrap();
            prop_assert_eq!(&got["raw_report_final"], &final_text);
            prop_assert_eq!(&got["raw_report_draft"], &draft_text);
        }

        #[test]
        fn diagnosis_round_trip(draft_text in "\\PC{0,300}") {
            let t = PromptTemplate::builtin(TemplateId::DraftDiagnosis);
            let out = render_prompt(&t, PromptInput::Draft { draft_text: &draft_text }).unwrap();
            prop_assert_eq!(&t.extract(&out).unwrap()["raw_report_draft"], &draft_text);
        }
    }
}
