//! Reader-study records and payloads.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::diff::DiffSpan;
use crate::ErrorType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReaderRole {
    Attending,
    Resident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Experience {
    YearsPostFellowship(u32),
    Pgy(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reader {
    pub reader_id: String,
    pub role: ReaderRole,
    pub experience: Experience,
}

/// Model judgment shown to readers after phase 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GptFeedback {
    pub flag: bool,
    pub explanation: String,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyCase {
    pub case_id: String,
    pub draft_text: String,
    pub final_text: String,
    pub diff: Vec<DiffSpan>,
    pub gpt: BTreeMap<ErrorType, GptFeedback>,
}

impl StudyCase {
    pub fn is_servable(&self) -> bool {
        ErrorType::ALL.iter().all(|t| self.gpt.contains_key(t))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase1Response {
    pub reader_id: String,
    pub case_id: String,
    pub judgments: BTreeMap<ErrorType, bool>,
    #[serde(default)]
    pub comments: BTreeMap<ErrorType, Option<String>>,
    pub submitted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase2Response {
    pub reader_id: String,
    pub case_id: String,
    pub helpful: BTreeMap<ErrorType, bool>,
    #[serde(default)]
    pub comments: BTreeMap<ErrorType, Option<String>>,
    pub submitted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipEvent {
    pub reader_id: String,
    pub case_id: String,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CommentRef {
    pub reader_id: String,
    pub case_id: String,
    pub phase: Phase,
    pub error_type: ErrorType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theme {
    ErrorTypeConfusion,
    IncorrectAnswer,
    StylisticDifferences,
    ClinicalIrrelevance,
    CorrectButRationaleWrong,
    ReaderSelfCorrection,
    Excluded,
}

impl Theme {
    pub const ALL: [Theme; 7] = [
        Theme::ErrorTypeConfusion,
        Theme::IncorrectAnswer,
        Theme::StylisticDifferences,
        Theme::ClinicalIrrelevance,
        Theme::CorrectButRationaleWrong,
        Theme::ReaderSelfCorrection,
        Theme::Excluded,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeLabel {
    pub comment: CommentRef,
    pub theme: Theme,
}

/// Offline study document: everything needed to compute statistics.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StudyBundle {
    pub readers: Vec<Reader>,
    pub cases: Vec<StudyCase>,
    #[serde(default)]
    pub phase1: Vec<Phase1Response>,
    #[serde(default)]
    pub phase2: Vec<Phase2Response>,
    #[serde(default)]
    pub skips: Vec<SkipEvent>,
    #[serde(default)]
    pub themes: Vec<ThemeLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub error_type: ErrorType,
    pub text: String,
}

pub fn phase1_questions() -> Vec<Question> {
    let text = |t| match t {
        ErrorType::InconsistentFindings => {
            "Does the draft omit a relevant finding that the final report contains, or contain one the final report does not?"
        }
        ErrorType::InconsistentDescriptions => {
            "Does the draft use a lexicon descriptor that the final report corrects or replaces, or omit one the final report uses?"
        }
        ErrorType::InconsistentDiagnoses => {
            "Is the draft BI-RADS score unsupported by the draft's own description of findings?"
        }
    };
    ErrorType::ALL
        .iter()
        .map(|&t| Question { error_type: t, text: text(t).to_string() })
        .collect()
}

pub fn phase2_questions() -> Vec<Question> {
    ErrorType::ALL
        .iter()
        .map(|&t| Question {
            error_type: t,
            text: format!("Was GPT's feedback on {} helpful?", t.title()),
        })
        .collect()
}

/// Blinded phase-1 view of a case. Has no field that could carry model output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase1Payload {
    pub case_id: String,
    pub draft_text: String,
    pub final_text: String,
    pub diff: Vec<DiffSpan>,
    pub questions: Vec<Question>,
    pub position: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase2Payload {
    pub case_id: String,
    pub gpt: BTreeMap<ErrorType, GptFeedback>,
    pub questions: Vec<Question>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum NextCase {
    Phase1(Phase1Payload),
    /// Phase 1 already submitted; resume at the helpfulness questions.
    Phase2(Phase2Payload),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub reader_id: String,
    pub total: usize,
    pub phase1_done: usize,
    pub phase2_done: usize,
    pub skipped: usize,
    pub remaining: usize,
}

/// Request bodies accepted by the service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase1Submission {
    pub reader_id: String,
    pub judgments: BTreeMap<ErrorType, bool>,
    #[serde(default)]
    pub comments: BTreeMap<ErrorType, Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase2Submission {
    pub reader_id: String,
    pub helpful: BTreeMap<ErrorType, bool>,
    #[serde(default)]
    pub comments: BTreeMap<ErrorType, Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipSubmission {
    pub reader_id: String,
}
