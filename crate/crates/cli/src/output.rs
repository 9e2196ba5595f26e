//! Shared input validation, output writing and error classification.

use std::fmt;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use draftcheck_core::corpus::{read_annotated, CorpusError, CorpusLine};
use draftcheck_core::feedback::{DiscoveryError, PipelineError};
use draftcheck_core::report::ReportError;
use draftcheck_core::rules::RuleError;
use draftcheck_core::stats::StatsError;
use draftcheck_core::study::{StudyBundle, StudyError, StudyStore};

use crate::args::Selection;

/// Bad flags or paths, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

pub fn error_code(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return "usage";
        }
        if let Some(s) = cause.downcast_ref::<StudyError>() {
            return s.code();
        }
        if cause.is::<CorpusError>() {
            return "corpus";
        }
        if cause.is::<StatsError>() {
            return "stats";
        }
        if cause.is::<PipelineError>() {
            return "pipeline";
        }
        if cause.is::<DiscoveryError>() {
            return "discovery";
        }
        if cause.is::<RuleError>() {
            return "rules";
        }
        if cause.is::<ReportError>() {
            return "report";
        }
        if cause.is::<serde_json::Error>() {
            return "json";
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
    }
    "error"
}

pub fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        return Err(usage(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

pub fn prepare_out(dir: &Path) -> anyhow::Result<PathBuf> {
    if dir.exists() && !dir.is_dir() {
        return Err(usage(format!("--out {} is not a directory", dir.display())));
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.to_path_buf())
}

pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    fs::write(path, to_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

pub fn print_json<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<()> {
    print!("{}", to_pretty(value)?);
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Corpus lines kept by `select`, in file order.
pub fn read_lines(path: &Path, select: &Selection) -> anyhow::Result<Vec<CorpusLine>> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let lines = read_annotated(BufReader::new(file))?;
    Ok(lines
        .into_iter()
        .filter(|l| select.split.is_none_or(|s| l.split == Some(s.into())))
        .filter(|l| !select.eligible_only || l.exclusion.is_none())
        .collect())
}

/// Bundle with the event log replayed on top, if one is given.
pub fn load_study(bundle: &Path, log: Option<&Path>) -> anyhow::Result<StudyBundle> {
    let b: StudyBundle = read_json(bundle)?;
    Ok(match log {
        Some(log) => StudyStore::open(b, log)?.bundle().clone(),
        None => StudyStore::new(b)?.bundle().clone(),
    })
}
