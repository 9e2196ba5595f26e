//! Two-phase blinded reader study: records, persistence, consensus, export
//! and the HTTP service.

mod model;
pub mod server;
mod store;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::*;
pub use store::{Event, StudyStore};

use crate::diff::word_diff;
use crate::feedback::{CaseInput, FeedbackResult};
use crate::stats::RatingMatrix;
use crate::ErrorType;

pub const GPT_RATER: &str = "gpt";

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("unknown reader {0:?}")]
    UnknownReader(String),
    #[error("unknown case {0:?}")]
    UnknownCase(String),
    #[error("case {0:?} lacks model feedback for some error type")]
    CaseNotServable(String),
    #[error("no cases remaining")]
    NoCasesRemaining,
    #[error("case {0:?} is waiting for phase-2 answers")]
    AwaitingPhase2(String),
    #[error("already submitted")]
    DuplicateSubmission,
    #[error("missing answers for {0:?}")]
    IncompleteJudgments(Vec<ErrorType>),
    #[error("phase 1 has not been submitted for this reader and case")]
    Phase1Missing,
    #[error("missing responses from readers {0:?}")]
    MissingResponses(Vec<String>),
    #[error("phase-2 response for reader {reader_id:?}, case {case_id:?} precedes or lacks phase 1")]
    PhaseOrder { reader_id: String, case_id: String },
    #[error("event log line {line}: {message}")]
    CorruptLog { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consensus {
    Yes,
    No,
    Tie,
}

impl Consensus {
    pub fn label(self) -> Option<bool> {
        match self {
            Consensus::Yes => Some(true),
            Consensus::No => Some(false),
            Consensus::Tie => None,
        }
    }
}

/// Strict majority; anything else (including 2-2) is a tie.
pub fn majority(judgments: &[bool]) -> Consensus {
    let yes = judgments.iter().filter(|j| **j).count();
    let no = judgments.len() - yes;
    if 2 * yes > judgments.len() {
        Consensus::Yes
    } else if 2 * no > judgments.len() {
        Consensus::No
    } else {
        Consensus::Tie
    }
}

/// Consensus over exactly the `attendings` for one case and error type.
pub fn attending_consensus(
    attendings: &[String],
    responses: &BTreeMap<String, bool>,
) -> Result<Consensus, StudyError> {
    let missing: Vec<String> = attendings.iter().filter(|a| !responses.contains_key(*a)).cloned().collect();
    if !missing.is_empty() {
        return Err(StudyError::MissingResponses(missing));
    }
    let votes: Vec<bool> = attendings.iter().map(|a| responses[a]).collect();
    Ok(majority(&votes))
}

/// Builds servable cases from pairs and the model results store.
pub fn build_cases(pairs: &[CaseInput], results: &[FeedbackResult]) -> Vec<StudyCase> {
    let mut by_case: HashMap<&str, BTreeMap<ErrorType, GptFeedback>> = HashMap::new();
    for r in results {
        by_case.entry(r.case_id.as_str()).or_default().insert(
            r.error_type,
            GptFeedback {
                flag: r.flag,
                explanation: r.explanation.clone(),
                model_id: r.model_id.clone(),
            },
        );
    }
    pairs
        .iter()
        .map(|p| StudyCase {
            case_id: p.case_id.clone(),
            draft_text: p.draft_text.clone(),
            final_text: p.final_text.clone(),
            diff: word_diff(&p.draft_text, &p.final_text),
            gpt: by_case.remove(p.case_id.as_str()).unwrap_or_default(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusOutcome {
    Yes,
    No,
    Tie,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusRow {
    pub case_id: String,
    pub outcome: ConsensusOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyExport {
    pub bundle: StudyBundle,
    /// Items x (readers in bundle order, then `gpt`).
    pub matrices: BTreeMap<ErrorType, RatingMatrix>,
    pub consensus: BTreeMap<ErrorType, Vec<ConsensusRow>>,
}

impl StudyExport {
    /// (gpt, consensus) label vectors with ties and missing consensus as `None`.
    pub fn gpt_vs_consensus(&self, error_type: ErrorType) -> (Vec<Option<bool>>, Vec<Option<bool>>) {
        let m = &self.matrices[&error_type];
        let g = m.rater_index(GPT_RATER).expect("gpt column");
        let outcome: HashMap<&str, &ConsensusOutcome> =
            self.consensus[&error_type].iter().map(|r| (r.case_id.as_str(), &r.outcome)).collect();
        let mut gpt = Vec::new();
        let mut cons = Vec::new();
        for (i, item) in m.items.iter().enumerate() {
            gpt.push(m.cells[i][g]);
            cons.push(match outcome.get(item.as_str()) {
                Some(ConsensusOutcome::Yes) => Some(true),
                Some(ConsensusOutcome::No) => Some(false),
                _ => None,
            });
        }
        (gpt, cons)
    }

    /// Human reader columns only.
    pub fn human_matrix(&self, error_type: ErrorType) -> RatingMatrix {
        let m = &self.matrices[&error_type];
        let keep: Vec<usize> = (0..m.n_raters()).filter(|&j| m.raters[j] != GPT_RATER).collect();
        RatingMatrix {
            items: m.items.clone(),
            raters: keep.iter().map(|&j| m.raters[j].clone()).collect(),
            cells: m.cells.iter().map(|row| keep.iter().map(|&j| row[j]).collect()).collect(),
        }
    }

    pub fn gpt_column(&self, error_type: ErrorType) -> Vec<Option<bool>> {
        let m = &self.matrices[&error_type];
        m.column(m.rater_index(GPT_RATER).expect("gpt column"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export serializes")
    }
}

/// Every phase-2 response needs an earlier-or-equal phase-1 response.
pub fn check_phase_order(bundle: &StudyBundle) -> Result<(), StudyError> {
    let p1: HashMap<(&str, &str), _> = bundle
        .phase1
        .iter()
        .map(|r| ((r.reader_id.as_str(), r.case_id.as_str()), r.submitted_at))
        .collect();
    for r in &bundle.phase2 {
        match p1.get(&(r.reader_id.as_str(), r.case_id.as_str())) {
            Some(t) if *t <= r.submitted_at => {}
            _ => {
                return Err(StudyError::PhaseOrder {
                    reader_id: r.reader_id.clone(),
                    case_id: r.case_id.clone(),
                })
            }
        }
    }
    Ok(())
}

pub fn export_study(bundle: &StudyBundle) -> Result<StudyExport, StudyError> {
    check_phase_order(bundle)?;
    let mut bundle = bundle.clone();
    bundle.phase1.sort_by(|a, b| (&a.case_id, &a.reader_id).cmp(&(&b.case_id, &b.reader_id)));
    bundle.phase2.sort_by(|a, b| (&a.case_id, &a.reader_id).cmp(&(&b.case_id, &b.reader_id)));
    bundle.skips.sort_by(|a, b| (&a.case_id, &a.reader_id, a.at).cmp(&(&b.case_id, &b.reader_id, b.at)));
    bundle.themes.sort_by(|a, b| a.comment.cmp(&b.comment));

    let cases: Vec<&StudyCase> = bundle.cases.iter().filter(|c| c.is_servable()).collect();
    let mut raters: Vec<String> = bundle.readers.iter().map(|r| r.reader_id.clone()).collect();
    raters.push(GPT_RATER.to_string());
    let attendings: Vec<String> = bundle
        .readers
        .iter()
        .filter(|r| r.role == ReaderRole::Attending)
        .map(|r| r.reader_id.clone())
        .collect();

    let mut matrices = BTreeMap::new();
    let mut consensus = BTreeMap::new();
    for t in ErrorType::ALL {
        let mut m = RatingMatrix::new(cases.iter().map(|c| c.case_id.clone()).collect(), raters.clone());
        let g = raters.len() - 1;
        for (i, c) in cases.iter().enumerate() {
            m.set(i, g, c.gpt.get(&t).map(|f| f.flag));
        }
        let mut per_case: BTreeMap<&str, BTreeMap<String, bool>> = BTreeMap::new();
        for r in &bundle.phase1 {
            let (Some(i), Some(j), Some(v)) = (m.item_index(&r.case_id), m.rater_index(&r.reader_id), r.judgments.get(&t))
            else {
                continue;
            };
            m.set(i, j, Some(*v));
            per_case.entry(r.case_id.as_str()).or_default().insert(r.reader_id.clone(), *v);
        }
        let rows = cases
            .iter()
            .map(|c| {
                let empty = BTreeMap::new();
                let votes = per_case.get(c.case_id.as_str()).unwrap_or(&empty);
                let outcome = match attending_consensus(&attendings, votes) {
                    Ok(Consensus::Yes) => ConsensusOutcome::Yes,
                    Ok(Consensus::No) => ConsensusOutcome::No,
                    Ok(Consensus::Tie) => ConsensusOutcome::Tie,
                    Err(_) => ConsensusOutcome::Missing,
                };
                ConsensusRow {
                    case_id: c.case_id.clone(),
                    outcome,
                }
            })
            .collect();
        m.retain_rated();
        matrices.insert(t, m);
        consensus.insert(t, rows);
    }
    Ok(StudyExport {
        bundle,
        matrices,
        consensus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeCount {
    pub theme: Theme,
    pub count: usize,
    /// Share of non-excluded labels; `None` for the excluded row.
    pub percentage: Option<f64>,
    pub unique_cases: usize,
}

pub fn theme_tally(labels: &[ThemeLabel]) -> Vec<ThemeCount> {
    let counted = labels.iter().filter(|l| l.theme != Theme::Excluded).count();
    Theme::ALL
        .iter()
        .map(|&theme| {
            let of: Vec<&ThemeLabel> = labels.iter().filter(|l| l.theme == theme).collect();
            let cases: BTreeSet<&str> = of.iter().map(|l| l.comment.case_id.as_str()).collect();
            let percentage = (theme != Theme::Excluded)
                .then(|| if counted == 0 { 0.0 } else { 100.0 * of.len() as f64 / counted as f64 });
            ThemeCount {
                theme,
                count: of.len(),
                percentage,
                unique_cases: cases.len(),
            }
        })
        .collect()
}

/// Flattens phase-2 responses into votes for the helpfulness statistics.
pub fn helpfulness_votes(bundle: &StudyBundle) -> Vec<crate::stats::HelpfulnessVote> {
    let roles: HashMap<&str, ReaderRole> = bundle.readers.iter().map(|r| (r.reader_id.as_str(), r.role)).collect();
    let mut out = Vec::new();
    for r in &bundle.phase2 {
        let Some(role) = roles.get(r.reader_id.as_str()) else { continue };
        for (t, h) in &r.helpful {
            out.push(crate::stats::HelpfulnessVote {
                case_id: r.case_id.clone(),
                reader_id: r.reader_id.clone(),
                role: *role,
                error_type: *t,
                helpful: *h,
            });
        }
    }
    out
}
