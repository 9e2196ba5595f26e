//! Agreement, reliability and helpfulness statistics.

use std::collections::BTreeMap;
use std::fs;

use serde::Serialize;

use draftcheck_core::stats::{
    agreement_report, bootstrap_ci, helpfulness_summary, krippendorff_alpha, substitution_delta, AgreementReport,
    AlphaResult, BootstrapCi, BootstrapConfig, RatingMatrix, SubstitutionConfig, SubstitutionResult,
};
use draftcheck_core::study::{helpfulness_votes, ReaderRole, StudyExport};
use draftcheck_core::ErrorType;

use crate::args::{AgreementArgs, AlphaArgs, DeltaArgs, Format, HelpfulnessArgs, MatrixSource, StatsCommon};
use crate::output::{load_study, prepare_out, print_json, read_json, require_file, usage, write_json};

fn bootstrap(c: &StatsCommon) -> anyhow::Result<BootstrapConfig> {
    if !(0.0 < c.confidence && c.confidence < 1.0) {
        return Err(usage("--confidence must lie strictly between 0 and 1"));
    }
    if c.iterations == 0 {
        return Err(usage("--iterations must be at least 1"));
    }
    Ok(BootstrapConfig {
        iterations: c.iterations,
        seed: c.seed,
        confidence: c.confidence,
    })
}

fn validate_common(c: &StatsCommon) -> anyhow::Result<BootstrapConfig> {
    let cfg = bootstrap(c)?;
    if let Some(out) = &c.out {
        prepare_out(out)?;
    }
    Ok(cfg)
}

/// JSON to stdout, or `text` lines when asked; JSON to `--out/<name>` when given.
fn emit<T: Serialize>(c: &StatsCommon, name: &str, value: &T, text: impl FnOnce() -> String) -> anyhow::Result<()> {
    if let Some(out) = &c.out {
        write_json(&out.join(name), value)?;
    }
    match c.format {
        Format::Json => print_json(value),
        Format::Text => {
            print!("{}", text());
            Ok(())
        }
    }
}

fn validate_source(s: &MatrixSource) -> anyhow::Result<()> {
    match (&s.matrix, &s.export) {
        (Some(p), _) | (None, Some(p)) => require_file(p),
        (None, None) => Err(usage("one of --matrix or --export is required")),
    }
}

fn read_matrix(path: &std::path::Path) -> anyhow::Result<RatingMatrix> {
    Ok(RatingMatrix::from_csv(&fs::read_to_string(path)?)?)
}

fn select_raters(m: &RatingMatrix, keep: &[usize]) -> RatingMatrix {
    RatingMatrix {
        items: m.items.clone(),
        raters: keep.iter().map(|&j| m.raters[j].clone()).collect(),
        cells: m.cells.iter().map(|row| keep.iter().map(|&j| row[j]).collect()).collect(),
    }
}

#[derive(Serialize)]
struct AgreementRow {
    error_type: ErrorType,
    /// Cases whose attending consensus was a tie or incomplete.
    excluded: usize,
    report: AgreementReport,
}

pub fn agreement(a: AgreementArgs) -> anyhow::Result<()> {
    require_file(&a.export)?;
    let cfg = validate_common(&a.common)?;
    let export: StudyExport = read_json(&a.export)?;
    let mut rows = Vec::new();
    for t in ErrorType::ALL {
        let (model, reference) = export.gpt_vs_consensus(t);
        rows.push(AgreementRow {
            error_type: t,
            excluded: reference.iter().filter(|r| r.is_none()).count(),
            report: agreement_report(&model, &reference, &cfg)?,
        });
    }
    emit(&a.common, "agreement.json", &rows, || {
        rows.iter()
            .map(|r| {
                let k = &r.report.kappa;
                format!(
                    "{} n={} agreement={:.3} kappa={:.3} ({:.3}-{:.3}) {}\n",
                    r.error_type, r.report.n_items, r.report.percent_agreement.value, k.value, k.ci_low, k.ci_high,
                    r.report.kappa_band
                )
            })
            .collect()
    })
}

#[derive(Serialize)]
struct AlphaRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    error_type: Option<ErrorType>,
    group: String,
    result: AlphaResult,
    ci: BootstrapCi,
}

fn alpha_row(m: &RatingMatrix, error_type: Option<ErrorType>, group: &str, cfg: &BootstrapConfig) -> anyhow::Result<AlphaRow> {
    let result = krippendorff_alpha(m)?;
    let rows: Vec<usize> = (0..m.n_items()).collect();
    let ci = bootstrap_ci(&rows, |idx| krippendorff_alpha(&m.select_rows(idx)).ok().map(|r| r.alpha), cfg)?;
    Ok(AlphaRow {
        error_type,
        group: group.to_string(),
        result,
        ci,
    })
}

pub fn alpha(a: AlphaArgs) -> anyhow::Result<()> {
    validate_source(&a.source)?;
    let cfg = validate_common(&a.common)?;
    if let Some(path) = &a.source.matrix {
        let row = alpha_row(&read_matrix(path)?, None, "all", &cfg)?;
        return emit(&a.common, "alpha.json", &row, || format!("{:.3}\n", row.result.alpha));
    }
    let export: StudyExport = read_json(a.source.export.as_deref().unwrap_or_else(|| unreachable!()))?;
    let role_of: BTreeMap<&str, ReaderRole> =
        export.bundle.readers.iter().map(|r| (r.reader_id.as_str(), r.role)).collect();
    let mut rows = Vec::new();
    for t in ErrorType::ALL {
        let human = export.human_matrix(t);
        let by_role = |role: ReaderRole| -> Vec<usize> {
            (0..human.n_raters()).filter(|&j| role_of.get(human.raters[j].as_str()) == Some(&role)).collect()
        };
        rows.push(alpha_row(&human, Some(t), "all", &cfg)?);
        for (role, name) in [(ReaderRole::Attending, "attending"), (ReaderRole::Resident, "resident")] {
            let keep = by_role(role);
            if keep.len() >= 2 {
                rows.push(alpha_row(&select_raters(&human, &keep), Some(t), name, &cfg)?);
            }
        }
    }
    emit(&a.common, "alpha.json", &rows, || {
        rows.iter()
            .map(|r| {
                let t = r.error_type.map(|t| t.to_string()).unwrap_or_default();
                format!("{t} {} {:.3} ({:.3}-{:.3})\n", r.group, r.result.alpha, r.ci.lo, r.ci.hi)
            })
            .collect()
    })
}

#[derive(Serialize)]
struct DeltaRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    error_type: Option<ErrorType>,
    result: SubstitutionResult,
}

pub fn delta(a: DeltaArgs) -> anyhow::Result<()> {
    validate_source(&a.source)?;
    let bootstrap = validate_common(&a.common)?;
    if a.permutation_iterations == 0 {
        return Err(usage("--permutation-iterations must be at least 1"));
    }
    let cfg = SubstitutionConfig {
        bootstrap,
        permutation_iterations: a.permutation_iterations,
        permutation_method: a.method.into(),
    };
    let inputs: Vec<(Option<ErrorType>, RatingMatrix, Vec<Option<bool>>)> = match &a.source.matrix {
        Some(path) => {
            let m = read_matrix(path)?;
            let j = m
                .rater_index(&a.model_column)
                .ok_or_else(|| anyhow::anyhow!("matrix has no {:?} column", a.model_column))?;
            let keep: Vec<usize> = (0..m.n_raters()).filter(|&k| k != j).collect();
            vec![(None, select_raters(&m, &keep), m.column(j))]
        }
        None => {
            let export: StudyExport = read_json(a.source.export.as_deref().unwrap_or_else(|| unreachable!()))?;
            ErrorType::ALL
                .iter()
                .map(|&t| (Some(t), export.human_matrix(t), export.gpt_column(t)))
                .collect()
        }
    };
    let mut rows = Vec::new();
    for (error_type, human, model) in inputs {
        rows.push(DeltaRow {
            error_type,
            result: substitution_delta(&human, &model, &cfg)?,
        });
    }
    emit(&a.common, "delta.json", &rows, || {
        rows.iter()
            .map(|r| {
                let t = r.error_type.map(|t| format!("{t} ")).unwrap_or_default();
                let s = &r.result;
                format!("{t}{:+.3} ({:+.3} to {:+.3}) p={:.3}\n", s.delta, s.ci.lo, s.ci.hi, s.p_value)
            })
            .collect()
    })
}

pub fn helpfulness(a: HelpfulnessArgs) -> anyhow::Result<()> {
    require_file(&a.bundle)?;
    if let Some(l) = &a.log {
        require_file(l)?;
    }
    let cfg = validate_common(&a.common)?;
    let bundle = load_study(&a.bundle, a.log.as_deref())?;
    let rows = helpfulness_summary(&helpfulness_votes(&bundle), a.stratify, &cfg)?;
    emit(&a.common, "helpfulness.json", &rows, || {
        rows.iter()
            .map(|r| {
                let role = match r.role {
                    Some(ReaderRole::Attending) => "attending",
                    Some(ReaderRole::Resident) => "resident",
                    None => "all",
                };
                let t = r.error_type.map(|t| t.to_string()).unwrap_or_else(|| "pooled".into());
                format!(
                    "{role} {t} {}/{} {:.1}% ({:.1}-{:.1})\n",
                    r.helpful,
                    r.total,
                    100.0 * r.proportion,
                    100.0 * r.ci.lo,
                    100.0 * r.ci.hi
                )
            })
            .collect()
    })
}
