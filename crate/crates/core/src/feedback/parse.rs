//! Tolerant parser for the vertical-bar feedback grammar.
//!
//! Accepts `Inconsistent Finding(s)` / `Description(s)` / `BI-RADS` labels in
//! any case, values True/False/Yes/No, and optional markdown emphasis. Each
//! explanation runs from its `Explanation:` marker to the next label.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ErrorType;

static LABEL: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)inconsistent[\s*_]+(findings?|descriptions?|diagnos[ie]s|bi-?rads)[\s*:=\-]*(true|false|yes|no)\b")
        .unwrap()
});
static EXPLANATION: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\**explanation\**\s*[:=]?\**").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("could not parse feedback: {reason}")]
pub struct ParseFailure {
    pub reason: String,
    pub raw: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedFlag {
    pub error_type: ErrorType,
    pub flag: bool,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFeedback {
    pub findings: ParsedFlag,
    pub descriptions: ParsedFlag,
    pub raw: String,
}

#[derive(Debug, Clone, Copy)]
struct LabelHit {
    error_type: ErrorType,
    flag: bool,
    start: usize,
    end: usize,
}

fn label_hits(text: &str) -> Vec<LabelHit> {
    LABEL
        .captures_iter(text)
        .map(|c| {
            let kind = c[1].to_ascii_lowercase();
            let error_type = if kind.starts_with("finding") {
                ErrorType::InconsistentFindings
            } else if kind.starts_with("description") {
                ErrorType::InconsistentDescriptions
            } else {
                ErrorType::InconsistentDiagnoses
            };
            let flag = matches!(c[2].to_ascii_lowercase().as_str(), "true" | "yes");
            let m = c.get(0).unwrap();
            LabelHit {
                error_type,
                flag,
                start: m.start(),
                end: m.end(),
            }
        })
        .collect()
}

fn clean(segment: &str) -> String {
    let s = match EXPLANATION.find(segment) {
        Some(m) => &segment[m.end()..],
        None => segment,
    };
    let s = s.trim_matches(|c: char| c.is_whitespace() || c == '|' || c == '*');
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn extract(text: &str, wanted: ErrorType) -> Result<ParsedFlag, String> {
    let hits = label_hits(text);
    let idx = hits
        .iter()
        .position(|h| h.error_type == wanted)
        .ok_or_else(|| format!("no {} label with a boolean value", wanted.title()))?;
    let hit = hits[idx];
    let stop = hits.get(idx + 1).map_or(text.len(), |h| h.start);
    let explanation = clean(&text[hit.end..stop]);
    if explanation.is_empty() {
        return Err(format!("{} has no explanation", wanted.title()));
    }
    Ok(ParsedFlag {
        error_type: wanted,
        flag: hit.flag,
        explanation,
    })
}

pub fn parse_pair_feedback(text: &str) -> Result<PairFeedback, ParseFailure> {
    let fail = |reason| ParseFailure {
        reason,
        raw: text.to_string(),
    };
    let findings = extract(text, ErrorType::InconsistentFindings).map_err(fail)?;
    let descriptions = extract(text, ErrorType::InconsistentDescriptions).map_err(fail)?;
    Ok(PairFeedback {
        findings,
        descriptions,
        raw: text.to_string(),
    })
}

pub fn parse_diagnosis_feedback(text: &str) -> Result<ParsedFlag, ParseFailure> {
    extract(text, ErrorType::InconsistentDiagnoses).map_err(|reason| ParseFailure {
        reason,
        raw: text.to_string(),
    })
}
