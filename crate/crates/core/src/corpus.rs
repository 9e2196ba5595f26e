//! Report-pair corpus: JSONL ingest, exclusion filters and seeded split sampling.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{levenshtein_within, parse_report, Modality, ReportPair, SectionKind, Sex};
use crate::rng::SeededRng;

pub const DEFAULT_SIMILARITY_THRESHOLD: usize = 50;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("duplicate case_id {case_id:?} on line {line}")]
    DuplicateCaseId { case_id: String, line: usize },
    #[error("split {split:?} needs {need} records but only {have} are eligible")]
    InsufficientRecords { split: Split, have: usize, need: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    IncompleteDraft,
    TooSimilar,
    MissingModality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub pair: ReportPair,
    pub ingest_index: usize,
    pub exclusion: Option<Exclusion>,
}

/// One input line of a corpus file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusLine {
    pub case_id: String,
    pub draft_text: String,
    pub final_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_age: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_sex: Option<Sex>,
    /// Present on annotated output; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<Exclusion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

pub fn ingest(path: &Path) -> Result<Vec<CorpusRecord>, CorpusError> {
    ingest_reader(BufReader::new(File::open(path)?))
}

/// Parses a JSONL corpus. Blank lines are skipped; line numbers are 1-based.
pub fn ingest_reader<R: BufRead>(reader: R) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut lines = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CorpusLine = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(parsed.case_id.clone()) {
            return Err(CorpusError::DuplicateCaseId {
                case_id: parsed.case_id,
                line: line_no,
            });
        }
        lines.push((line_no, parsed));
    }

    lines
        .into_par_iter()
        .enumerate()
        .map(|(ingest_index, (line_no, l))| {
            let malformed = |field: &str| CorpusError::MalformedLine {
                line: line_no,
                message: format!("{field} is empty"),
            };
            let draft = parse_report(&l.draft_text).map_err(|_| malformed("draft_text"))?;
            let final_report = parse_report(&l.final_text).map_err(|_| malformed("final_text"))?;
            Ok(CorpusRecord {
                pair: ReportPair {
                    case_id: l.case_id,
                    draft,
                    final_report,
                    patient_age: l.patient_age,
                    patient_sex: l.patient_sex,
                },
                ingest_index,
                exclusion: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCriteria {
    /// Pairs with draft-to-final edit distance at or below this are too similar.
    pub similarity_threshold: usize,
}

impl Default for FilterCriteria {
    fn default() -> Self {
        FilterCriteria {
            similarity_threshold: DEFAULT_SIMILARITY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExclusionChecks {
    pub incomplete_draft: bool,
    pub too_similar: bool,
    pub missing_modality: bool,
}

impl ExclusionChecks {
    /// First firing criterion in precedence order.
    pub fn primary(&self) -> Option<Exclusion> {
        if self.incomplete_draft {
            Some(Exclusion::IncompleteDraft)
        } else if self.too_similar {
            Some(Exclusion::TooSimilar)
        } else if self.missing_modality {
            Some(Exclusion::MissingModality)
        } else {
            None
        }
    }
}

pub fn evaluate_exclusions(pair: &ReportPair, criteria: &FilterCriteria) -> ExclusionChecks {
    let draft = &pair.draft;
    let incomplete_draft = !draft.has_findings_section()
        || !draft.sections.contains_key(&SectionKind::Impression)
        || draft.scores.is_empty();

    let too_similar = levenshtein_within(
        &draft.raw_text,
        &pair.final_report.raw_text,
        criteria.similarity_threshold,
    )
    .is_some();

    // A modality counts as present if either report has its section or score.
    let has = |section: SectionKind, modality: Modality| {
        [draft, &pair.final_report]
            .iter()
            .any(|r| r.sections.contains_key(&section) || r.score(modality).is_some())
    };
    let missing_modality = !(has(SectionKind::MammogramFindings, Modality::Mammogram)
        && has(SectionKind::UltrasoundFindings, Modality::Ultrasound));

    ExclusionChecks {
        incomplete_draft,
        too_similar,
        missing_modality,
    }
}

/// Per-criterion counts; criteria are counted independently, so the three
/// counts may sum to more than `excluded`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub similarity_threshold: usize,
    pub total: usize,
    pub incomplete_draft: usize,
    pub too_similar: usize,
    pub missing_modality: usize,
    pub excluded: usize,
    pub eligible: usize,
}

pub fn apply_filters(records: &mut [CorpusRecord], criteria: &FilterCriteria) -> FlowSummary {
    let checks: Vec<ExclusionChecks> = records
        .par_iter()
        .map(|r| evaluate_exclusions(&r.pair, criteria))
        .collect();
    let mut summary = FlowSummary {
        similarity_threshold: criteria.similarity_threshold,
        total: records.len(),
        incomplete_draft: 0,
        too_similar: 0,
        missing_modality: 0,
        excluded: 0,
        eligible: 0,
    };
    for (record, c) in records.iter_mut().zip(&checks) {
        record.exclusion = c.primary();
        summary.incomplete_draft += usize::from(c.incomplete_draft);
        summary.too_similar += usize::from(c.too_similar);
        summary.missing_modality += usize::from(c.missing_modality);
        if record.exclusion.is_some() {
            summary.excluded += 1;
        } else {
            summary.eligible += 1;
        }
    }
    summary
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    CommonErrorAnalysis,
    ReaderStudy,
    PromptSample,
    Unassigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub split: Split,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub analysis: usize,
    pub reader: usize,
    pub prompt: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        SplitSizes {
            analysis: 5000,
            reader: 100,
            prompt: 15,
        }
    }
}

/// Draws the analysis split from all records, then the reader and prompt
/// splits from non-excluded records outside it. Candidates are visited in
/// ingest order and picked with a partial Fisher-Yates shuffle driven by
/// [`SeededRng::new(seed)`](SeededRng), one generator for all three draws.
pub fn sample_splits(
    records: &[CorpusRecord],
    sizes: &SplitSizes,
    seed: u64,
) -> Result<Vec<SplitAssignment>, CorpusError> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| records[i].ingest_index);

    let mut splits = vec![Split::Unassigned; records.len()];
    let mut rng = SeededRng::new(seed);

    let mut draw = |split: Split, candidates: Vec<usize>, need: usize, splits: &mut Vec<Split>| {
        if candidates.len() < need {
            return Err(CorpusError::InsufficientRecords {
                split,
                have: candidates.len(),
                need,
            });
        }
        for i in rng.sample(&candidates, need) {
            splits[i] = split;
        }
        Ok(())
    };

    draw(Split::CommonErrorAnalysis, order.clone(), sizes.analysis, &mut splits)?;
    let eligible = |splits: &Vec<Split>| -> Vec<usize> {
        order
            .iter()
            .copied()
            .filter(|&i| splits[i] == Split::Unassigned && records[i].exclusion.is_none())
            .collect()
    };
    let reader_pool = eligible(&splits);
    draw(Split::ReaderStudy, reader_pool, sizes.reader, &mut splits)?;
    let prompt_pool = eligible(&splits);
    draw(Split::PromptSample, prompt_pool, sizes.prompt, &mut splits)?;

    Ok(splits.into_iter().map(|split| SplitAssignment { split, seed }).collect())
}

/// Writes records back as JSONL with `exclusion` and, when given, `split`.
pub fn write_jsonl<W: Write>(
    mut out: W,
    records: &[CorpusRecord],
    splits: Option<&[SplitAssignment]>,
) -> std::io::Result<()> {
    for (i, r) in records.iter().enumerate() {
        let line = CorpusLine {
            case_id: r.pair.case_id.clone(),
            draft_text: r.pair.draft.raw_text.clone(),
            final_text: r.pair.final_report.raw_text.clone(),
            patient_age: r.pair.patient_age,
            patient_sex: r.pair.patient_sex,
            exclusion: r.exclusion,
            split: splits.map(|s| s[i].split),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads back the annotated JSONL written by [`write_jsonl`].
pub fn read_annotated<R: BufRead>(reader: R) -> Result<Vec<CorpusLine>, CorpusError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
