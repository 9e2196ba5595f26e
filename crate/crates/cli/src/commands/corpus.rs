//! Corpus preparation: ingest, filter, sample, lint and diff.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;

use serde::Serialize;

use draftcheck_core::corpus::{
    self as corpus, apply_filters, sample_splits, write_jsonl, CorpusRecord, FilterCriteria, Split, SplitSizes,
};
use draftcheck_core::diff::{word_diff, DiffSpan};
use draftcheck_core::report::{levenshtein, parse_report};
use draftcheck_core::rules::{ConsistencyVerdict, RuleSet};

use crate::args::{DiffArgs, FilterArgs, IngestArgs, LintArgs, SampleArgs};
use crate::output::{prepare_out, print_json, read_lines, require_file, write_json, write_jsonl as write_rows};

fn write_records(
    path: &std::path::Path,
    records: &[CorpusRecord],
    splits: Option<&[draftcheck_core::corpus::SplitAssignment]>,
) -> anyhow::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_jsonl(&mut w, records, splits)?;
    Ok(())
}

pub fn ingest(a: IngestArgs) -> anyhow::Result<()> {
    require_file(&a.input.corpus)?;
    let out = prepare_out(&a.out.out)?;
    let records = corpus::ingest(&a.input.corpus)?;
    write_records(&out.join("ingested.jsonl"), &records, None)?;
    print_json(&serde_json::json!({ "records": records.len() }))
}

pub fn filter(a: FilterArgs) -> anyhow::Result<()> {
    require_file(&a.input.corpus)?;
    let out = prepare_out(&a.out.out)?;
    let mut records = corpus::ingest(&a.input.corpus)?;
    let summary = apply_filters(&mut records, &FilterCriteria { similarity_threshold: a.threshold });
    write_records(&out.join("filtered.jsonl"), &records, None)?;
    write_json(&out.join("flow.json"), &summary)?;
    print_json(&summary)
}

#[derive(Serialize)]
struct SampleSummary {
    seed: u64,
    flow: draftcheck_core::corpus::FlowSummary,
    splits: BTreeMap<Split, usize>,
}

pub fn sample(a: SampleArgs) -> anyhow::Result<()> {
    require_file(&a.input.corpus)?;
    let out = prepare_out(&a.out.out)?;
    let mut records = corpus::ingest(&a.input.corpus)?;
    let flow = apply_filters(&mut records, &FilterCriteria { similarity_threshold: a.threshold });
    let sizes = SplitSizes {
        analysis: a.analysis,
        reader: a.reader,
        prompt: a.prompt,
    };
    let assignments = sample_splits(&records, &sizes, a.seed)?;
    write_records(&out.join("splits.jsonl"), &records, Some(&assignments))?;
    let mut splits = BTreeMap::new();
    for s in &assignments {
        *splits.entry(s.split).or_insert(0) += 1;
    }
    let summary = SampleSummary { seed: a.seed, flow, splits };
    write_json(&out.join("sample.json"), &summary)?;
    print_json(&summary)
}

#[derive(Serialize)]
struct LintRow {
    case_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<ConsistencyVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn lint(a: LintArgs) -> anyhow::Result<()> {
    require_file(&a.input.corpus)?;
    if let Some(r) = &a.rules {
        require_file(r)?;
    }
    let out = prepare_out(&a.out.out)?;
    let custom = match &a.rules {
        Some(p) => Some(RuleSet::from_json(&fs::read_to_string(p)?)?),
        None => None,
    };
    let rules = custom.as_ref().unwrap_or_else(|| RuleSet::builtin());
    let lines = read_lines(&a.input.corpus, &a.select)?;
    let rows: Vec<LintRow> = lines
        .iter()
        .map(|l| {
            let result = parse_report(&l.draft_text)
                .map_err(|e| e.to_string())
                .and_then(|r| rules.check(&r).map_err(|e| e.to_string()));
            let (verdict, error) = match result {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e)),
            };
            LintRow {
                case_id: l.case_id.clone(),
                verdict,
                error,
            }
        })
        .collect();
    write_rows(&out.join("lint.jsonl"), &rows)?;
    let flagged = rows.iter().filter(|r| r.verdict.as_ref().is_some_and(|v| v.flag)).count();
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    print_json(&serde_json::json!({
        "cases": rows.len(),
        "flagged": flagged,
        "errors": errors,
        "rules_version": rules.version(),
    }))
}

#[derive(Serialize)]
struct DiffRow {
    case_id: String,
    distance: usize,
    spans: Vec<DiffSpan>,
}

pub fn diff(a: DiffArgs) -> anyhow::Result<()> {
    require_file(&a.input.corpus)?;
    let out = prepare_out(&a.out.out)?;
    let lines = read_lines(&a.input.corpus, &a.select)?;
    let rows: Vec<DiffRow> = lines
        .iter()
        .filter(|l| a.case.as_ref().is_none_or(|c| *c == l.case_id))
        .map(|l| DiffRow {
            case_id: l.case_id.clone(),
            distance: levenshtein(&l.draft_text, &l.final_text),
            spans: word_diff(&l.draft_text, &l.final_text),
        })
        .collect();
    if let Some(c) = &a.case {
        if rows.is_empty() {
            anyhow::bail!("case {c:?} not found in corpus");
        }
    }
    write_rows(&out.join("diffs.jsonl"), &rows)?;
    print_json(&serde_json::json!({ "cases": rows.len() }))
}
