//! Semi-structured breast imaging report model.
//!
//! Reports are split into sections on a fixed set of heading markers, every
//! `BI-RADS <n>` mention is attributed to a modality by the nearest preceding
//! label, and lexicon descriptors are extracted from the full text.

mod birads;
pub mod lexicon;
mod levenshtein;

use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use birads::{most_severe, BiradsCategory};
pub use levenshtein::{levenshtein, levenshtein_within};
pub use lexicon::{extract_terms, LexiconCategory, LexiconTerm};

/// Maximum distance, in bytes, between a modality label and the score it names.
pub const LABEL_WINDOW: usize = 120;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("report text is empty")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Mammogram,
    Ultrasound,
    Overall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    ClinicalIndication,
    MammogramFindings,
    UltrasoundFindings,
    Impression,
    Recommendation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub span: (usize, usize),
    pub text: String,
}

/// One `BI-RADS <n>` occurrence. `span` covers the modality label when it is
/// directly attached, the score token, and a trailing assessment phrase such
/// as ": INCOMPLETE - NEED ADDITIONAL IMAGING EVALUATION".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreMention {
    pub category: BiradsCategory,
    pub modality: Option<Modality>,
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedReport {
    pub raw_text: String,
    pub sections: BTreeMap<SectionKind, Section>,
    pub scores: BTreeMap<Modality, BiradsCategory>,
    pub mentions: Vec<ScoreMention>,
    pub descriptors: Vec<LexiconTerm>,
    /// True when the overall score came from an explicit "OVERALL" label.
    pub overall_explicit: bool,
}

impl ParsedReport {
    pub fn section(&self, kind: SectionKind) -> Option<&str> {
        self.sections.get(&kind).map(|s| s.text.as_str())
    }

    pub fn score(&self, modality: Modality) -> Option<BiradsCategory> {
        self.scores.get(&modality).copied()
    }

    pub fn has_findings_section(&self) -> bool {
        self.sections.contains_key(&SectionKind::MammogramFindings)
            || self.sections.contains_key(&SectionKind::UltrasoundFindings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPair {
    pub case_id: String,
    pub draft: ParsedReport,
    #[serde(rename = "final")]
    pub final_report: ParsedReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_age: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_sex: Option<Sex>,
}

impl ReportPair {
    pub fn from_texts(case_id: impl Into<String>, draft: &str, final_text: &str) -> Result<Self, ReportError> {
        Ok(ReportPair {
            case_id: case_id.into(),
            draft: parse_report(draft)?,
            final_report: parse_report(final_text)?,
            patient_age: None,
            patient_sex: None,
        })
    }
}

static CLINICAL_INDICATION: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)clinical\s+indication\s*:?").unwrap());
static MAMMOGRAM_HEADING: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\bmammogram\s*:").unwrap());
static ULTRASOUND_HEADING: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\bus\s+breast\b").unwrap());
static IMPRESSION_HEADING: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\bimpression\s*:").unwrap());
static RECOMMEND: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)recommend").unwrap());

static SCORE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\b(?:BI-?RADS|BIRADS)(?:\s+(?:category|assessment))?\s*[:#]?\s*([0-6])([abc])?\b").unwrap()
});
static ASSESSMENT: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)^\s*(?:[:\-–]\s*)?(?:incomplete(?:\s*-\s*need\s+additional\s+imaging\s+evaluation)?|need\s+additional\s+imaging\s+evaluation|negative|probably\s+benign|benign|suspicious(?:\s+abnormality)?|low\s+suspicion|moderate\s+suspicion|high\s+suspicion|highly\s+suggestive\s+of\s+malignancy|known\s+biopsy[- ]proven\s+malignancy)\b",
    )
    .unwrap()
});
static MODALITY_LABEL: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i:\b(overall|mammo(?:gram|graphy|graphic)?|ultrasound|sonographic)\b)|\b(US)\b").unwrap()
});

/// Parses report text into sections, scores and descriptors.
pub fn parse_report(text: &str) -> Result<ParsedReport, ReportError> {
    if text.trim().is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let sections = split_sections(text);
    let mentions = find_scores(text);

    let mut scores = BTreeMap::new();
    let mut overall_explicit = false;
    for m in &mentions {
        if let Some(modality) = m.modality {
            scores.insert(modality, m.category);
            if modality == Modality::Overall {
                overall_explicit = true;
            }
        }
    }
    if !overall_explicit {
        if let Some(last) = mentions.last() {
            scores.insert(Modality::Overall, last.category);
        }
    }

    Ok(ParsedReport {
        raw_text: text.to_string(),
        sections,
        scores,
        mentions,
        descriptors: extract_terms(text),
        overall_explicit,
    })
}

/// Returns the dictionary terms found in a parsed report.
pub fn extract_lexicon_terms(report: &ParsedReport) -> Vec<LexiconTerm> {
    report.descriptors.clone()
}

fn first_at_or_after(re: &Regex, text: &str, from: usize) -> Option<(usize, usize)> {
    re.find_at(text, from).map(|m| (m.start(), m.end()))
}

fn split_sections(text: &str) -> BTreeMap<SectionKind, Section> {
    // (kind, heading start, content start)
    let mut heads: Vec<(SectionKind, usize, usize)> = Vec::new();

    let indication = first_at_or_after(&CLINICAL_INDICATION, text, 0);
    if let Some((s, e)) = indication {
        heads.push((SectionKind::ClinicalIndication, s, e));
    }
    // Headings in the exam title precede the clinical indication.
    let anchor = indication.map_or(0, |(_, e)| e);

    let mammo = first_at_or_after(&MAMMOGRAM_HEADING, text, anchor);
    if let Some((s, e)) = mammo {
        heads.push((SectionKind::MammogramFindings, s, e));
    }
    let us = first_at_or_after(&ULTRASOUND_HEADING, text, anchor);
    if let Some((s, e)) = us {
        heads.push((SectionKind::UltrasoundFindings, s, e));
    }

    let after_findings = [mammo, us]
        .iter()
        .flatten()
        .map(|(_, e)| *e)
        .max()
        .unwrap_or(anchor);
    let impression = first_at_or_after(&IMPRESSION_HEADING, text, after_findings);
    if let Some((s, e)) = impression {
        heads.push((SectionKind::Impression, s, e));
    }

    let rec_from = impression.map_or(after_findings, |(_, e)| e);
    if let Some((s, _)) = first_at_or_after(&RECOMMEND, text, rec_from) {
        let floor = heads.iter().map(|h| h.2).filter(|&c| c <= s).max().unwrap_or(0);
        let start = sentence_start(text, s).max(floor);
        heads.push((SectionKind::Recommendation, start, start));
    }

    heads.sort_by_key(|h| (h.1, h.0));
    let mut out = BTreeMap::new();
    for (i, &(kind, _, content)) in heads.iter().enumerate() {
        let end = heads.get(i + 1).map_or(text.len(), |h| h.1).max(content);
        out.insert(
            kind,
            Section {
                span: (content, end),
                text: text[content..end].to_string(),
            },
        );
    }
    out
}

fn sentence_start(text: &str, pos: usize) -> usize {
    let before = &text[..pos];
    match before.rfind(". ") {
        Some(i) => {
            let mut j = i + 2;
            while j < pos && text.as_bytes()[j].is_ascii_whitespace() {
                j += 1;
            }
            j
        }
        None => 0,
    }
}

fn label_modality(word: &str) -> Modality {
    let w = word.to_ascii_lowercase();
    if w == "overall" {
        Modality::Overall
    } else if w.starts_with("mammo") {
        Modality::Mammogram
    } else {
        Modality::Ultrasound
    }
}

fn find_scores(text: &str) -> Vec<ScoreMention> {
    let labels: Vec<(usize, usize, Modality)> = MODALITY_LABEL
        .captures_iter(text)
        .map(|c| {
            let m = c.get(1).or_else(|| c.get(2)).unwrap();
            (m.start(), m.end(), label_modality(m.as_str()))
        })
        .collect();

    let raw: Vec<(usize, usize, BiradsCategory)> = SCORE
        .captures_iter(text)
        .filter_map(|c| {
            let whole = c.get(0).unwrap();
            let digit = c.get(1)?.as_str().chars().next()?;
            let sub = c.get(2).and_then(|m| m.as_str().chars().next());
            Some((whole.start(), whole.end(), BiradsCategory::from_parts(digit, sub)?))
        })
        .collect();

    let mut out = Vec::with_capacity(raw.len());
    for (idx, &(start, end, category)) in raw.iter().enumerate() {
        let prev_score_end = if idx == 0 { 0 } else { raw[idx - 1].1 };
        let label = labels
            .iter()
            .rev()
            .find(|(ls, le, _)| *le <= start && *ls >= prev_score_end && start - le <= LABEL_WINDOW);

        let mut span_start = start;
        if let Some(&(ls, le, _)) = label {
            if text[le..start].chars().all(|c| c.is_whitespace() || c == ':') {
                span_start = ls;
            }
        }
        let span_end = ASSESSMENT.find(&text[end..]).map_or(end, |m| end + m.end());
        out.push(ScoreMention {
            category,
            modality: label.map(|l| l.2),
            span: (span_start, span_end),
        });
    }
    out
}
