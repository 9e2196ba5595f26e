//! Batch feedback runner: bounded worker pool, retries with exponential
//! backoff, and an append-only JSONL results store that supports resume.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::client::{ChatClient, ClientError, RequestParams};
use super::parse::{parse_diagnosis_feedback, parse_pair_feedback};
use super::prompt::{render_prompt, PromptError, PromptInput, PromptTemplate, TemplateId};
use crate::ErrorType;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("results store line {line}: {message}")]
    CorruptStore { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backoff {
    #[serde(with = "millis")]
    pub initial: Duration,
    pub factor: f64,
    #[serde(with = "millis")]
    pub max: Duration,
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            initial: Duration::from_millis(500),
            factor: 2.0,
            max: Duration::from_secs(30),
        }
    }
}

impl Backoff {
    /// Wait before retry number `retry` (1-based): `initial * factor^(retry-1)`, capped.
    pub fn delay(&self, retry: u32) -> Duration {
        let exp = self.factor.powi(retry.saturating_sub(1) as i32);
        let secs = (self.initial.as_secs_f64() * exp).min(self.max.as_secs_f64());
        Duration::from_secs_f64(secs.max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub concurrency_limit: usize,
    pub max_retries: u32,
    pub backoff: Backoff,
    pub params: RequestParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            concurrency_limit: 4,
            max_retries: 3,
            backoff: Backoff::default(),
            params: RequestParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseInput {
    pub case_id: String,
    pub draft_text: String,
    pub final_text: String,
}

impl From<&crate::report::ReportPair> for CaseInput {
    fn from(p: &crate::report::ReportPair) -> Self {
        CaseInput {
            case_id: p.case_id.clone(),
            draft_text: p.draft.raw_text.clone(),
            final_text: p.final_report.raw_text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Ok { flag: bool, explanation: String },
    ParseFailure { reason: String },
    ExhaustedRetries { error: String },
}

/// One row of the results store, keyed by (case_id, error_type).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub case_id: String,
    pub error_type: ErrorType,
    #[serde(flatten)]
    pub outcome: Outcome,
    #[serde(default)]
    pub raw_response: Option<String>,
    pub model_id: String,
    pub attempts: u32,
    pub latency_ms: u64,
}

/// A successfully parsed judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackResult {
    pub case_id: String,
    pub error_type: ErrorType,
    pub flag: bool,
    pub explanation: String,
    pub raw_response: String,
    pub model_id: String,
    pub latency_ms: u64,
    pub attempts: u32,
}

impl ResultRow {
    pub fn as_result(&self) -> Option<FeedbackResult> {
        match &self.outcome {
            Outcome::Ok { flag, explanation } => Some(FeedbackResult {
                case_id: self.case_id.clone(),
                error_type: self.error_type,
                flag: *flag,
                explanation: explanation.clone(),
                raw_response: self.raw_response.clone().unwrap_or_default(),
                model_id: self.model_id.clone(),
                latency_ms: self.latency_ms,
                attempts: self.attempts,
            }),
            _ => None,
        }
    }

    /// Final rows are not redone on resume; transport failures are.
    pub fn is_final(&self) -> bool {
        !matches!(self.outcome, Outcome::ExhaustedRetries { .. })
    }
}

/// Append-only results store. Later rows for the same key supersede earlier ones.
pub struct ResultsStore {
    path: Option<PathBuf>,
    rows: Vec<ResultRow>,
}

impl ResultsStore {
    pub fn in_memory() -> Self {
        ResultsStore {
            path: None,
            rows: Vec::new(),
        }
    }

    /// Opens or creates a JSONL store. A torn final line (interrupted write) is ignored.
    pub fn open(path: &Path) -> Result<Self, PipelineError> {
        let mut rows = Vec::new();
        if path.exists() {
            let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<Result<_, _>>()?;
            let n = lines.len();
            for (i, line) in lines.into_iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str(&line) {
                    Ok(row) => rows.push(row),
                    Err(_) if i + 1 == n => {}
                    Err(e) => {
                        return Err(PipelineError::CorruptStore {
                            line: i + 1,
                            message: e.to_string(),
                        })
                    }
                }
            }
        }
        Ok(ResultsStore {
            path: Some(path.to_path_buf()),
            rows,
        })
    }

    pub fn rows(&self) -> &[ResultRow] {
        &self.rows
    }

    /// Latest row per (case_id, error_type).
    pub fn latest(&self) -> BTreeMap<(String, ErrorType), &ResultRow> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            out.insert((r.case_id.clone(), r.error_type), r);
        }
        out
    }

    pub fn completed_cases(&self) -> HashSet<String> {
        let latest = self.latest();
        let mut ids: HashSet<String> = latest.keys().map(|(id, _)| id.clone()).collect();
        ids.retain(|id| {
            ErrorType::ALL
                .iter()
                .all(|t| latest.get(&(id.clone(), *t)).is_some_and(|r| r.is_final()))
        });
        ids
    }

    pub fn results(&self) -> Vec<FeedbackResult> {
        self.latest().values().filter_map(|r| r.as_result()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub total_cases: usize,
    pub skipped: usize,
    pub processed: usize,
    pub ok_rows: usize,
    pub parse_failures: usize,
    pub exhausted: usize,
}

pub(crate) struct CallOutcome {
    pub result: Result<String, ClientError>,
    pub attempts: u32,
    pub latency_ms: u64,
}

/// Sends `prompt`, retrying transport failures up to `max_retries` times.
/// `latency_ms` covers the final attempt only.
pub(crate) fn call_with_retry<C: ChatClient + ?Sized>(
    client: &C,
    prompt: &str,
    config: &PipelineConfig,
) -> CallOutcome {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let start = Instant::now();
        let result = client.send(prompt, &config.params);
        let latency_ms = start.elapsed().as_millis() as u64;
        match result {
            Err(_) if attempts <= config.max_retries => {
                std::thread::sleep(config.backoff.delay(attempts));
            }
            result => {
                return CallOutcome {
                    result,
                    attempts,
                    latency_ms,
                }
            }
        }
    }
}

fn process_case<C: ChatClient + ?Sized>(
    case: &CaseInput,
    client: &C,
    config: &PipelineConfig,
    pair_prompt: &PromptTemplate,
    diag_prompt: &PromptTemplate,
) -> Result<Vec<ResultRow>, PromptError> {
    let pair_text = render_prompt(
        pair_prompt,
        PromptInput::Pair {
            final_text: &case.final_text,
            draft_text: &case.draft_text,
        },
    )?;
    let diag_text = render_prompt(
        diag_prompt,
        PromptInput::Draft {
            draft_text: &case.draft_text,
        },
    )?;
    let model_id = client.model_id().to_string();
    let row = |error_type, outcome, call: &CallOutcome| ResultRow {
        case_id: case.case_id.clone(),
        error_type,
        outcome,
        raw_response: call.result.as_ref().ok().cloned(),
        model_id: model_id.clone(),
        attempts: call.attempts,
        latency_ms: call.latency_ms,
    };

    let mut rows = Vec::with_capacity(3);
    let call = call_with_retry(client, &pair_text, config);
    let pair_types = [ErrorType::InconsistentFindings, ErrorType::InconsistentDescriptions];
    match &call.result {
        Err(e) => {
            for t in pair_types {
                rows.push(row(t, Outcome::ExhaustedRetries { error: e.to_string() }, &call));
            }
        }
        Ok(text) => match parse_pair_feedback(text) {
            Ok(p) => {
                for f in [p.findings, p.descriptions] {
                    let o = Outcome::Ok {
                        flag: f.flag,
                        explanation: f.explanation,
                    };
                    rows.push(row(f.error_type, o, &call));
                }
            }
            Err(e) => {
                for t in pair_types {
                    rows.push(row(t, Outcome::ParseFailure { reason: e.reason.clone() }, &call));
                }
            }
        },
    }

    let call = call_with_retry(client, &diag_text, config);
    let t = ErrorType::InconsistentDiagnoses;
    let outcome = match &call.result {
        Err(e) => Outcome::ExhaustedRetries { error: e.to_string() },
        Ok(text) => match parse_diagnosis_feedback(text) {
            Ok(f) => Outcome::Ok {
                flag: f.flag,
                explanation: f.explanation,
            },
            Err(e) => Outcome::ParseFailure { reason: e.reason },
        },
    };
    rows.push(row(t, outcome, &call));
    Ok(rows)
}

/// Runs both detection prompts for every case not already complete in
/// `store`. Workers pull cases in input order; a single writer appends rows
/// and flushes after each case. Each worker holds at most one request in
/// flight, so `concurrency_limit` bounds concurrent requests.
pub fn run_feedback_pipeline<C: ChatClient + ?Sized>(
    cases: &[CaseInput],
    client: &C,
    config: &PipelineConfig,
    store: &mut ResultsStore,
) -> Result<PipelineSummary, PipelineError> {
    let pair_prompt = PromptTemplate::builtin(TemplateId::PairFindingsDescriptions);
    let diag_prompt = PromptTemplate::builtin(TemplateId::DraftDiagnosis);
    run_with_templates(cases, client, config, store, &pair_prompt, &diag_prompt)
}

pub fn run_with_templates<C: ChatClient + ?Sized>(
    cases: &[CaseInput],
    client: &C,
    config: &PipelineConfig,
    store: &mut ResultsStore,
    pair_prompt: &PromptTemplate,
    diag_prompt: &PromptTemplate,
) -> Result<PipelineSummary, PipelineError> {
    let done = store.completed_cases();
    let todo: Vec<&CaseInput> = cases.iter().filter(|c| !done.contains(&c.case_id)).collect();
    let skipped = cases.len() - todo.len();

    let mut writer = match &store.path {
        Some(p) => Some(BufWriter::new(OpenOptions::new().create(true).append(true).open(p)?)),
        None => None,
    };

    let next = AtomicUsize::new(0);
    let workers = config.concurrency_limit.max(1).min(todo.len().max(1));
    let (tx, rx) = mpsc::channel::<(usize, Result<Vec<ResultRow>, PromptError>)>();

    let mut collected: Vec<(usize, Vec<ResultRow>)> = Vec::with_capacity(todo.len());
    let mut first_err: Option<PipelineError> = None;
    std::thread::scope(|s| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, todo) = (&next, &todo);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(case) = todo.get(i) else { break };
                let rows = process_case(case, client, config, pair_prompt, diag_prompt);
                if tx.send((i, rows)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, rows) in rx {
            let rows = match rows {
                Ok(r) => r,
                Err(e) => {
                    first_err.get_or_insert(e.into());
                    next.store(usize::MAX / 2, Ordering::SeqCst);
                    continue;
                }
            };
            if let Some(w) = writer.as_mut() {
                let res = rows
                    .iter()
                    .try_for_each(|r| {
                        serde_json::to_writer(&mut *w, r)?;
                        w.write_all(b"\n").map_err(serde_json::Error::io)
                    })
                    .map_err(std::io::Error::from)
                    .and_then(|_| w.flush());
                if let Err(e) = res {
                    first_err.get_or_insert(e.into());
                    next.store(usize::MAX / 2, Ordering::SeqCst);
                }
            }
            collected.push((i, rows));
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }

    collected.sort_by_key(|(i, _)| *i);
    let mut summary = PipelineSummary {
        total_cases: cases.len(),
        skipped,
        processed: collected.len(),
        ok_rows: 0,
        parse_failures: 0,
        exhausted: 0,
    };
    for (_, rows) in collected {
        for r in rows {
            match r.outcome {
                Outcome::Ok { .. } => summary.ok_rows += 1,
                Outcome::ParseFailure { .. } => summary.parse_failures += 1,
                Outcome::ExhaustedRetries { .. } => summary.exhausted += 1,
            }
            store.rows.push(r);
        }
    }
    Ok(summary)
}
