//! Two-step common-error discovery: per-pair difference summaries, then an
//! aggregation prompt over all summaries, chunked to a context budget.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::client::{ChatClient, ClientError};
use super::pipeline::{call_with_retry, CaseInput, PipelineConfig};
use super::prompt::{format_summaries, render_prompt, PromptError, PromptInput, PromptTemplate, TemplateId};

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error("no pairs supplied")]
    EmptyInput,
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("case {case_id}: {source} after {attempts} attempts")]
    Client {
        case_id: String,
        attempts: u32,
        source: ClientError,
    },
    #[error("aggregation chunk {chunk}: {source} after {attempts} attempts")]
    AggregateClient {
        chunk: usize,
        attempts: u32,
        source: ClientError,
    },
    #[error("could not parse any \"type: frequency\" line from aggregation output")]
    AggregateParseFailure { raw: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Frequency {
    Count(f64),
    /// Fraction in [0, 1], e.g. `(35%)` parses as 0.35.
    Proportion(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateLine {
    pub label: String,
    pub frequency: Frequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveredError {
    pub label: String,
    /// Estimated number of summaries showing this error type.
    pub count: f64,
    /// `count` over the number of summaries.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryReport {
    pub summaries: Vec<(String, String)>,
    pub chunks: usize,
    pub errors: Vec<DiscoveredError>,
    pub raw_aggregates: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    pub pipeline: PipelineConfig,
    /// Upper bound on rendered aggregation prompt length, in characters.
    pub context_budget_chars: usize,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            pipeline: PipelineConfig::default(),
            context_budget_chars: 400_000,
        }
    }
}

static PERCENT: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^(?P<label>.*?)[\s:\-–]*\(?\s*(?P<n>\d+(?:\.\d+)?)\s*%\s*\)?(?P<rest>.*)$").unwrap());
static COUNT: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"^(?P<label>.*?)\s*(?:[:\-–]\s*|\(\s*)(?P<n>\d+(?:\.\d+)?)\s*(?:cases?|pairs?|instances?|occurrences?|reports?|times)?\s*\)?\s*\.?$")
        .unwrap()
});
static BULLET: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*(?:[-*•]+|\d+[.)]|\d+,)?\s*").unwrap());

fn normalize_label(s: &str) -> String {
    let s = s.trim_matches(|c: char| c.is_whitespace() || matches!(c, '*' | '_' | ':' | '-' | '–' | '"' | '.'));
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Extracts `label: n`, `label (n)`, `label: 35%` and `label (35%)` lines.
/// Lines without a trailing frequency are ignored.
pub fn parse_aggregate_output(text: &str) -> Result<Vec<AggregateLine>, DiscoveryError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let body = BULLET.replace(line, "");
        let body = body.trim().trim_matches('*').trim();
        if body.is_empty() {
            continue;
        }
        if let Some(c) = PERCENT.captures(body) {
            let label = normalize_label(&c["label"]);
            let n: f64 = c["n"].parse().unwrap_or(f64::NAN);
            if !label.is_empty() && n.is_finite() && c["rest"].trim().len() < label.len() {
                out.push(AggregateLine {
                    label,
                    frequency: Frequency::Proportion(n / 100.0),
                });
                continue;
            }
        }
        if let Some(c) = COUNT.captures(body) {
            let label = normalize_label(&c["label"]);
            if let (false, Ok(n)) = (label.is_empty(), c["n"].parse::<f64>()) {
                out.push(AggregateLine {
                    label,
                    frequency: Frequency::Count(n),
                });
            }
        }
    }
    if out.is_empty() {
        return Err(DiscoveryError::AggregateParseFailure { raw: text.to_string() });
    }
    Ok(out)
}

/// Greedy chunking of summaries so each rendered prompt fits `budget`
/// characters. A single oversized summary still gets its own chunk.
pub fn chunk_summaries(template: &PromptTemplate, summaries: &[String], budget: usize) -> Vec<Vec<String>> {
    let overhead = template.body.chars().count().saturating_sub("{summaries}".len());
    let mut chunks: Vec<Vec<String>> = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for s in summaries {
        current.push(s.clone());
        let len = overhead + format_summaries(&current).chars().count();
        if len > budget && current.len() > 1 {
            let last = current.pop().unwrap();
            chunks.push(std::mem::take(&mut current));
            current.push(last);
        }
    }
    if !current.is_empty() {
        chunks.push(current);
    }
    chunks
}

/// Sums chunk frequencies per normalized label. Proportions are scaled by
/// their chunk's summary count before summing.
pub fn merge_chunks(chunks: &[(usize, Vec<AggregateLine>)], total: usize) -> Vec<DiscoveredError> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for (size, lines) in chunks {
        for l in lines {
            let n = match l.frequency {
                Frequency::Count(n) => n,
                Frequency::Proportion(p) => p * *size as f64,
            };
            *counts.entry(l.label.clone()).or_default() += n;
        }
    }
    let mut out: Vec<DiscoveredError> = counts
        .into_iter()
        .map(|(label, count)| DiscoveredError {
            share: if total > 0 { count / total as f64 } else { 0.0 },
            label,
            count,
        })
        .collect();
    out.sort_by(|a, b| b.count.total_cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    out
}

pub fn discover_common_errors<C: ChatClient + ?Sized>(
    pairs: &[CaseInput],
    client: &C,
    config: &DiscoveryConfig,
) -> Result<DiscoveryReport, DiscoveryError> {
    if pairs.is_empty() {
        return Err(DiscoveryError::EmptyInput);
    }
    let diff_t = PromptTemplate::builtin(TemplateId::PairDiffSummary);
    let agg_t = PromptTemplate::builtin(TemplateId::AggregateErrors);

    let prompts: Vec<String> = pairs
        .iter()
        .map(|p| {
            render_prompt(
                &diff_t,
                PromptInput::Pair {
                    final_text: &p.final_text,
                    draft_text: &p.draft_text,
                },
            )
        })
        .collect::<Result<_, _>>()?;

    let results: Mutex<Vec<Option<Result<String, DiscoveryError>>>> =
        Mutex::new((0..pairs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = config.pipeline.concurrency_limit.max(1).min(pairs.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= pairs.len() {
                    break;
                }
                let call = call_with_retry(client, &prompts[i], &config.pipeline);
                let r = call.result.map_err(|source| DiscoveryError::Client {
                    case_id: pairs[i].case_id.clone(),
                    attempts: call.attempts,
                    source,
                });
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut summaries = Vec::with_capacity(pairs.len());
    for (p, r) in pairs.iter().zip(results.into_inner().unwrap()) {
        summaries.push((p.case_id.clone(), r.expect("every index visited")?));
    }

    let texts: Vec<String> = summaries.iter().map(|(_, s)| s.clone()).collect();
    let chunks = chunk_summaries(&agg_t, &texts, config.context_budget_chars);
    let mut parsed = Vec::with_capacity(chunks.len());
    let mut raw_aggregates = Vec::with_capacity(chunks.len());
    for (ci, chunk) in chunks.iter().enumerate() {
        let prompt = render_prompt(&agg_t, PromptInput::Summaries(chunk))?;
        let call = call_with_retry(client, &prompt, &config.pipeline);
        let raw = call.result.map_err(|source| DiscoveryError::AggregateClient {
            chunk: ci,
            attempts: call.attempts,
            source,
        })?;
        parsed.push((chunk.len(), parse_aggregate_output(&raw)?));
        raw_aggregates.push(raw);
    }

    Ok(DiscoveryReport {
        errors: merge_chunks(&parsed, pairs.len()),
        chunks: chunks.len(),
        summaries,
        raw_aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::client::FnClient;

    fn pairs(n: usize) -> Vec<CaseInput> {
        (0..n)
            .map(|i| CaseInput {
                case_id: format!("p{i}"),
                draft_text: format!("draft {i}"),
                final_text: format!("final {i}"),
            })
            .collect()
    }

    #[test]
    fn parses_counts_and_percentages() {
        let text = "Common discrepancies:\n\
            1. **Unclear or ambiguous descriptions** (35%)\n\
            2. Missed findings: 12\n\
            - Incorrect BI-RADS score - 4 cases\n\
            * Laterality errors (3)\n\
            Overall the resident did well.";
        let lines = parse_aggregate_output(text).unwrap();
        assert_eq!(
            lines,
            vec![
                AggregateLine { label: "unclear or ambiguous descriptions".into(), frequency: Frequency::Proportion(0.35) },
                AggregateLine { label: "missed findings".into(), frequency: Frequency::Count(12.0) },
                AggregateLine { label: "incorrect bi-rads score".into(), frequency: Frequency::Count(4.0) },
                AggregateLine { label: "laterality errors".into(), frequency: Frequency::Count(3.0) },
            ]
        );
    }

    #[test]
    fn unparseable_aggregate_keeps_raw() {
        match parse_aggregate_output("nothing to report") {
            Err(DiscoveryError::AggregateParseFailure { raw }) => assert_eq!(raw, "nothing to report"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chunks_respect_budget() {
        let t = PromptTemplate::builtin(TemplateId::AggregateErrors);
        let s: Vec<String> = (0..50).map(|i| format!("- summary number {i}")).collect();
        let budget = t.body.len() + 200;
        let chunks = chunk_summaries(&t, &s, budget);
        assert!(chunks.len() > 1);
        assert_eq!(chunks.iter().map(Vec::len).sum::<usize>(), 50);
        for c in &chunks {
            let out = render_prompt(&t, PromptInput::Summaries(c)).unwrap();
            assert!(out.chars().count() <= budget);
        }
    }

    #[test]
    fn merge_scales_proportions() {
        let chunks = vec![
            (10, vec![AggregateLine { label: "a".into(), frequency: Frequency::Proportion(0.5) }]),
            (4, vec![AggregateLine { label: "a".into(), frequency: Frequency::Count(2.0) },
                     AggregateLine { label: "b".into(), frequency: Frequency::Count(3.0) }]),
        ];
        let m = merge_chunks(&chunks, 14);
        assert_eq!(m[0].label, "a");
        assert!((m[0].count - 7.0).abs() < 1e-12);
        assert!((m[0].share - 0.5).abs() < 1e-12);
        assert_eq!(m[1].label, "b");
    }

    #[test]
    fn three_chunks_merge_by_sum() {
        let client = FnClient::new("mock", |p: &str| {
            if p.contains("Summarize the most common types") {
                Ok("- Missed findings: 1".to_string())
            } else {
                Ok("- The draft missed a finding".to_string())
            }
        });
        let cfg = DiscoveryConfig { context_budget_chars: 1, ..DiscoveryConfig::default() };
        let r = discover_common_errors(&pairs(3), &client, &cfg).unwrap();
        assert_eq!(r.chunks, 3);
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].label, "missed findings");
        assert_eq!(r.errors[0].count, 3.0);
    }

    #[test]
    fn single_chunk_sees_all_summaries() {
        let client = FnClient::new("mock", |p: &str| {
            if p.contains("Summarize the most common types") {
                assert!(p.contains("1, - missed") && p.contains("3, - missed"));
                Ok("Missed findings: 3".to_string())
            } else {
                Ok("- missed".to_string())
            }
        });
        let r = discover_common_errors(&pairs(3), &client, &DiscoveryConfig::default()).unwrap();
        assert_eq!(r.chunks, 1);
        assert_eq!(r.errors[0].count, 3.0);
        assert_eq!(r.summaries.len(), 3);
    }

    #[test]
    fn empty_input() {
        let client = FnClient::new("mock", |_: &str| Ok(String::new()));
        assert!(matches!(
            discover_common_errors(&[], &client, &DiscoveryConfig::default()),
            Err(DiscoveryError::EmptyInput)
        ));
    }
}
