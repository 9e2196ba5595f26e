//! Acceptance suite: one PASS/FAIL line per criterion, every tolerance
//! pinned below. Runs without the libtest harness so the lines always print.

use std::collections::BTreeMap;
use std::io::Cursor;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::atomic::{AtomicI64, Ordering};
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};

use draftcheck_core::corpus::{apply_filters, ingest, ingest_reader, sample_splits, FilterCriteria, Split, SplitSizes};
use draftcheck_core::feedback::{
    parse_diagnosis_feedback, parse_pair_feedback, run_feedback_pipeline, Backoff, CaseInput, FeedbackResult, PipelineConfig,
    ReplayClient, ResultsStore,
};
use draftcheck_core::report::{parse_report, BiradsCategory, Modality};
use draftcheck_core::rng::SeededRng;
use draftcheck_core::rules::check_diagnosis_consistency;
use draftcheck_core::stats::{
    agreement_report, bootstrap_ci, helpfulness_summary, krippendorff_alpha, permutation_test_delta, substitution_delta,
    BootstrapConfig, Confusion, PermutationMethod, RatingMatrix, SubstitutionConfig,
};
use draftcheck_core::study::{
    build_cases, export_study, helpfulness_votes, Experience, GptFeedback, Phase1Response, Phase1Submission,
    Phase2Submission, Reader, ReaderRole, StudyBundle, StudyCase, StudyStore,
};
use draftcheck_core::ErrorType;

const KAPPA_EXACT_TOL: f64 = 1e-9;
const KAPPA_PRINTED: f64 = 0.790;
const KAPPA_PRINTED_TOL: f64 = 0.02;
const KAPPA_BUDGET: Duration = Duration::from_secs(1);
const ALPHA_ORACLE_TOL: f64 = 1e-9;
const ALPHA_CASES: usize = 200;
const ALPHA_BUDGET: Duration = Duration::from_secs(5);
const PERM_ITERATIONS: usize = 10_000;
const PERM_TOL: f64 = 0.02;
const SUBSTITUTION_BUDGET: Duration = Duration::from_secs(30);
const E2E_BUDGET: Duration = Duration::from_secs(60);

const RESIDENT: &str = include_str!("fixtures/example1_resident.txt");
const ATTENDING: &str = include_str!("fixtures/example1_attending.txt");
const DIAGNOSIS_EXAMPLE: &str = include_str!("fixtures/diagnosis_example1.txt");
const DIAGNOSIS_EXAMPLE_OUTPUT: &str = include_str!("fixtures/diagnosis_example1_output.txt");
const PAIR_OUTPUT: &str = include_str!("fixtures/example1_output.txt");
const FOCAL_OUTPUT: &str = include_str!("fixtures/s3_diagnosis_output.txt");
const COMPLICATED_CYST: &str = include_str!("fixtures/complicated_cyst_draft.txt");
const BIOPSY_CLIPS: &str = include_str!("fixtures/biopsy_clips_draft.txt");
const FOCAL_ASYMMETRY: &str = include_str!("fixtures/focal_asymmetry_draft.txt");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("took {took:?}, budget {budget:?}"))?;
    Ok(took)
}

fn repo_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn kappa_reconstruction() -> Outcome {
    let start = Instant::now();
    let c = Confusion::new(30, 2, 7, 56);
    let agreement = c.percent_agreement().map_err(|e| e.to_string())?;
    let kappa = c.kappa().map_err(|e| e.to_string())?;
    // p_o = 86/95; p_e = (32*37 + 63*58) / 95^2, so kappa = (8170-4838)/(9025-4838)
    let hand_agreement = 86.0 / 95.0;
    let hand_kappa = 3332.0 / 4187.0;
    ensure(c.total() == 95, || format!("N = {}", c.total()))?;
    ensure((agreement - hand_agreement).abs() < KAPPA_EXACT_TOL, || format!("agreement {agreement}"))?;
    ensure(format!("{agreement:.4}") == "0.9053", || format!("agreement {agreement:.4}"))?;
    ensure((kappa - hand_kappa).abs() < KAPPA_EXACT_TOL, || format!("kappa {kappa} vs {hand_kappa}"))?;
    ensure(format!("{kappa:.3}") == "0.796", || format!("kappa {kappa:.3}"))?;
    ensure((kappa - KAPPA_PRINTED).abs() <= KAPPA_PRINTED_TOL, || format!("kappa {kappa} vs printed {KAPPA_PRINTED}"))?;
    let took = within_budget(start, KAPPA_BUDGET)?;
    Ok(format!("agreement={agreement:.4} kappa={kappa:.6} in {took:?}"))
}

/// Pair enumeration over ordered rater pairs within each item.
fn alpha_oracle(cells: &[Vec<Option<bool>>]) -> Option<f64> {
    let mut o = [[0.0f64; 2]; 2];
    for row in cells {
        let vals: Vec<usize> = row.iter().flatten().map(|&b| usize::from(b)).collect();
        let m = vals.len();
        if m < 2 {
            continue;
        }
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    o[vals[i]][vals[j]] += 1.0 / (m as f64 - 1.0);
                }
            }
        }
    }
    let n_c = [o[0][0] + o[0][1], o[1][0] + o[1][1]];
    let n = n_c[0] + n_c[1];
    if n == 0.0 {
        return None;
    }
    let mut d_o = 0.0;
    let mut d_e = 0.0;
    for c in 0..2 {
        for k in 0..2 {
            if c != k {
                d_o += o[c][k];
                d_e += n_c[c] * n_c[k];
            }
        }
    }
    if d_e == 0.0 {
        return Some(1.0);
    }
    Some(1.0 - (n - 1.0) * d_o / d_e)
}

fn matrix(cells: Vec<Vec<Option<bool>>>) -> RatingMatrix {
    let items = (0..cells.len()).map(|i| format!("u{i}")).collect();
    let raters = (0..cells.first().map_or(0, |r| r.len())).map(|r| format!("r{r}")).collect();
    RatingMatrix::from_rows(items, raters, cells).unwrap()
}

fn alpha_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = SeededRng::new(20240601);
    let mut compared = 0;
    for case in 0..ALPHA_CASES {
        let items = 1 + rng.below(6);
        let raters = 1 + rng.below(4);
        let cells: Vec<Vec<Option<bool>>> = (0..items)
            .map(|_| (0..raters).map(|_| if rng.below(4) == 0 { None } else { Some(rng.coin()) }).collect())
            .collect();
        let got = krippendorff_alpha(&matrix(cells.clone())).ok().map(|r| r.alpha);
        let want = alpha_oracle(&cells);
        match (got, want) {
            (Some(g), Some(w)) => {
                ensure((g - w).abs() < ALPHA_ORACLE_TOL, || format!("case {case}: {g} vs oracle {w} on {cells:?}"))?;
                compared += 1;
            }
            (None, None) => {}
            _ => return Err(format!("case {case}: {got:?} vs oracle {want:?} on {cells:?}")),
        }
    }
    let (y, n) = (Some(true), Some(false));
    let fixture = krippendorff_alpha(&matrix(vec![vec![n, n], vec![y, y], vec![n, y], vec![y, y]]))
        .map_err(|e| e.to_string())?
        .alpha;
    ensure((fixture - 8.0 / 15.0).abs() < ALPHA_ORACLE_TOL, || format!("fixture alpha {fixture}"))?;
    ensure(format!("{fixture:.3}") == "0.533", || format!("fixture alpha {fixture:.3}"))?;
    let took = within_budget(start, ALPHA_BUDGET)?;
    Ok(format!("{compared}/{ALPHA_CASES} defined matrices match, fixture={fixture:.3} in {took:?}"))
}

fn substitution_fixture() -> (RatingMatrix, Vec<Option<bool>>) {
    let (y, n) = (Some(true), Some(false));
    let cells = vec![
        vec![y, y, y, n, y, y, n, y],
        vec![n, n, y, n, n, n, n, y],
        vec![y, n, y, y, y, None, y, y],
        vec![n, n, n, n, y, n, n, n],
        vec![y, y, n, y, y, y, y, n],
    ];
    (matrix(cells), vec![y, n, n, n, y])
}

fn substitution_delta_checks() -> Outcome {
    let start = Instant::now();
    let (y, n) = (Some(true), Some(false));
    let column = [y, n, y, y, n, None, y];
    let identical = matrix(column.iter().map(|&v| vec![v; 8]).collect());
    let cfg = SubstitutionConfig {
        bootstrap: BootstrapConfig { iterations: 500, seed: 3, confidence: 0.95 },
        ..SubstitutionConfig::default()
    };
    let same = substitution_delta(&identical, &column, &cfg).map_err(|e| e.to_string())?;
    ensure(same.delta == 0.0, || format!("delta with identical labels = {}", same.delta))?;

    let (human, model) = substitution_fixture();
    let exact = permutation_test_delta(&human, &model, PERM_ITERATIONS, 11, PermutationMethod::Exact)
        .map_err(|e| e.to_string())?;
    ensure(exact.configurations == 256, || format!("exact enumerated {}", exact.configurations))?;
    let mc = permutation_test_delta(&human, &model, PERM_ITERATIONS, 11, PermutationMethod::MonteCarlo)
        .map_err(|e| e.to_string())?;
    let gap = (mc.p_value - exact.p_value).abs();
    ensure(gap <= PERM_TOL, || format!("monte carlo p {} vs exact {}", mc.p_value, exact.p_value))?;
    let took = within_budget(start, SUBSTITUTION_BUDGET)?;
    Ok(format!("identical delta=0, p exact={:.4} mc={:.4} in {took:?}", exact.p_value, mc.p_value))
}

fn bootstrap_determinism() -> Outcome {
    let cfg = BootstrapConfig { iterations: 2000, seed: 99, confidence: 0.95 };
    let mut rng = SeededRng::new(8);
    let data: Vec<f64> = (0..60).map(|_| rng.below(1000) as f64 / 10.0).collect();
    let mean = |s: &[f64]| Some(s.iter().sum::<f64>() / s.len() as f64);
    let a = bootstrap_ci(&data, mean, &cfg).map_err(|e| e.to_string())?;
    let b = bootstrap_ci(&data, mean, &cfg).map_err(|e| e.to_string())?;
    let bytes = |ci| serde_json::to_vec(&ci).unwrap();
    ensure(bytes(a) == bytes(b), || "repeated bootstrap differs".into())?;
    ensure(a.lo <= a.estimate && a.estimate <= a.hi, || format!("mean CI {a:?}"))?;

    let flags: Vec<bool> = (0..80).map(|i| i % 7 < 5).collect();
    let share = |s: &[bool]| Some(s.iter().filter(|b| **b).count() as f64 / s.len() as f64);
    let p = bootstrap_ci(&flags, share, &cfg).map_err(|e| e.to_string())?;
    ensure(p.lo <= p.estimate && p.estimate <= p.hi, || format!("proportion CI {p:?}"))?;

    let (model, truth) = kappa_labels();
    let r1 = agreement_report(&model, &truth, &cfg).map_err(|e| e.to_string())?;
    let r2 = agreement_report(&model, &truth, &cfg).map_err(|e| e.to_string())?;
    ensure(serde_json::to_vec(&r1).unwrap() == serde_json::to_vec(&r2).unwrap(), || "agreement report differs".into())?;
    for (name, e) in [("agreement", r1.percent_agreement), ("kappa", r1.kappa), ("f1", r1.f1)] {
        ensure(e.ci_low <= e.value && e.value <= e.ci_high, || format!("{name} CI {e:?}"))?;
    }
    Ok(format!(
        "byte-identical; mean {:.2} in [{:.2}, {:.2}]; kappa {:.3} in [{:.3}, {:.3}]",
        a.estimate, a.lo, a.hi, r1.kappa.value, r1.kappa.ci_low, r1.kappa.ci_high
    ))
}

/// Label vectors realizing the (30, 2, 7, 56) confusion matrix.
fn kappa_labels() -> (Vec<Option<bool>>, Vec<Option<bool>>) {
    let mut model = Vec::new();
    let mut truth = Vec::new();
    for (count, m, t) in [(30, true, true), (2, true, false), (7, false, true), (56, false, false)] {
        for _ in 0..count {
            model.push(Some(m));
            truth.push(Some(t));
        }
    }
    (model, truth)
}

fn rule_oracle_fixtures() -> Outcome {
    let cases = [
        ("focal asymmetry with B2", FOCAL_ASYMMETRY, true),
        ("diagnosis example 1", DIAGNOSIS_EXAMPLE, false),
        ("complicated cyst with B2", COMPLICATED_CYST, true),
        ("biopsy clips with B1", BIOPSY_CLIPS, true),
    ];
    for (name, text, want) in cases {
        let report = parse_report(text).map_err(|e| format!("{name}: {e}"))?;
        let v = check_diagnosis_consistency(&report).map_err(|e| format!("{name}: {e}"))?;
        ensure(v.flag == want, || format!("{name}: flag {} ({:?})", v.flag, v.explanations))?;
    }
    Ok("4/4 verdicts reproduced".into())
}

fn parser_fixtures() -> Outcome {
    use BiradsCategory::*;
    use Modality::*;
    let cases = [
        ("resident", RESIDENT, [B1, B2, B2]),
        ("attending", ATTENDING, [B0, B2, B0]),
    ];
    for (name, text, [m, u, o]) in cases {
        let r = parse_report(text).map_err(|e| e.to_string())?;
        let got = [r.score(Mammogram), r.score(Ultrasound), r.score(Overall)];
        ensure(got == [Some(m), Some(u), Some(o)], || format!("{name}: {got:?}"))?;
    }
    Ok("resident (1, 2, 2), attending (0, 2, 0)".into())
}

const COMPLETE: &str = "MAMMOGRAM: Breast density: Scattered areas of fibroglandular density. No suspicious masses, \
calcifications, or other findings are seen. US BREAST COMPLETE BILATERAL No suspicious abnormalities were seen \
sonographically. Mammo BI-RADS 1: NEGATIVE Ultrasound BI-RADS 1: NEGATIVE IMPRESSION: No imaging evidence of \
malignancy. OVERALL BI-RADS 1: NEGATIVE A 1 year screening mammogram is recommended.";

fn line(id: &str, draft: &str, final_text: &str) -> String {
    serde_json::json!({ "case_id": id, "draft_text": draft, "final_text": final_text }).to_string()
}

fn filter_semantics() -> Outcome {
    // distances 0, 1, 25 and 50 are too similar; 51 and 80 are not
    let similar = [0usize, 1, 25, 50];
    let distinct = [51usize, 80, 120];
    let mut lines = Vec::new();
    for (i, d) in similar.iter().chain(&distinct).enumerate() {
        lines.push(line(&format!("d{i}"), COMPLETE, &format!("{COMPLETE}{}", "x".repeat(*d))));
    }
    let pad = "y".repeat(80);
    let no_impression = COMPLETE.split(" IMPRESSION:").next().unwrap();
    lines.push(line("incomplete", no_impression, &format!("{COMPLETE}{pad}")));
    let mammo_only = "MAMMOGRAM: No suspicious masses are seen. Mammo BI-RADS 1: NEGATIVE IMPRESSION: Negative. OVERALL BI-RADS 1";
    lines.push(line("mammo-only", mammo_only, &format!("{mammo_only}{pad}")));
    let mut records = ingest_reader(Cursor::new(lines.join("\n"))).map_err(|e| e.to_string())?;
    let flow = apply_filters(&mut records, &FilterCriteria { similarity_threshold: 50 });
    ensure(flow.too_similar == similar.len(), || format!("too_similar {} != {}", flow.too_similar, similar.len()))?;
    ensure(flow.incomplete_draft == 1, || format!("incomplete_draft {}", flow.incomplete_draft))?;
    ensure(flow.missing_modality == 1, || format!("missing_modality {}", flow.missing_modality))?;
    ensure(flow.eligible == distinct.len(), || format!("eligible {}", flow.eligible))?;

    let mut corpus = ingest(&repo_fixture("corpus.jsonl")).map_err(|e| e.to_string())?;
    let f = apply_filters(&mut corpus, &FilterCriteria::default());
    ensure((f.too_similar, f.incomplete_draft, f.missing_modality) == (5, 3, 2), || format!("fixture corpus {f:?}"))?;
    Ok(format!("k={} too similar; seeded corpus (5, 3, 2)", similar.len()))
}

fn feedback_grammar() -> Outcome {
    let pair = parse_pair_feedback(PAIR_OUTPUT).map_err(|e| e.reason)?;
    ensure(pair.findings.flag && !pair.descriptions.flag, || format!("pair flags {:?}", (pair.findings.flag, pair.descriptions.flag)))?;
    let focal = parse_diagnosis_feedback(FOCAL_OUTPUT).map_err(|e| e.reason)?;
    ensure(focal.flag, || "focal asymmetry output should be True".into())?;
    let example = parse_diagnosis_feedback(DIAGNOSIS_EXAMPLE_OUTPUT).map_err(|e| e.reason)?;
    ensure(!example.flag, || "diagnosis example output should be False".into())?;

    let pieces = [
        "Inconsistent", " Finding", " Findings", " Description", " BI-RADS", " BIRADS", ":", " True", " False", " yes",
        " |", "\n", "Explanation:", " the", "*", "**", "=", "-", "é", "\u{0}", " ", "Diagnosis",
    ];
    let mut rng = SeededRng::new(404);
    let mut failures = 0usize;
    let total = 5000;
    for _ in 0..total {
        let len = rng.below(24);
        let text: String = (0..len).map(|_| pieces[rng.below(pieces.len())]).collect();
        let run = catch_unwind(AssertUnwindSafe(|| {
            let a = parse_pair_feedback(&text).is_err();
            let b = parse_diagnosis_feedback(&text).is_err();
            usize::from(a) + usize::from(b)
        }));
        failures += run.map_err(|_| format!("parser panicked on {text:?}"))?;
    }
    Ok(format!("3 printed outputs parse; {total} fuzz inputs, {failures} parse failures, no panics"))
}

fn reader(id: &str, role: ReaderRole) -> Reader {
    Reader {
        reader_id: id.into(),
        role,
        experience: match role {
            ReaderRole::Attending => Experience::YearsPostFellowship(5),
            ReaderRole::Resident => Experience::Pgy(4),
        },
    }
}

fn panel() -> Vec<Reader> {
    let mut r: Vec<Reader> = (1..=4).map(|i| reader(&format!("att{i}"), ReaderRole::Attending)).collect();
    r.extend((1..=4).map(|i| reader(&format!("res{i}"), ReaderRole::Resident)));
    r
}

fn consensus_ties() -> Outcome {
    let ties = [5usize, 8, 6];
    let readers = panel();
    let cases: Vec<StudyCase> = (0..100)
        .map(|i| StudyCase {
            case_id: format!("c{i:03}"),
            draft_text: "d".into(),
            final_text: "f".into(),
            diff: Vec::new(),
            gpt: ErrorType::ALL
                .iter()
                .map(|&t| (t, GptFeedback { flag: i % 3 == 0, explanation: "x".into(), model_id: "m".into() }))
                .collect(),
        })
        .collect();
    let t0 = Utc.timestamp_opt(1_700_000_000, 0).unwrap();
    let mut phase1 = Vec::new();
    for (ci, case) in cases.iter().enumerate() {
        for (ri, r) in readers.iter().enumerate() {
            let judgments = ErrorType::ALL
                .iter()
                .enumerate()
                .map(|(ti, &t)| {
                    let tie = ci < ties[ti];
                    let vote = match (r.role, tie) {
                        (ReaderRole::Attending, true) => ri % 2 == 0,
                        (ReaderRole::Attending, false) => if ri < 3 { ci % 4 < 2 } else { ci % 5 == 0 },
                        (ReaderRole::Resident, _) => (ci + ri) % 2 == 0,
                    };
                    (t, vote)
                })
                .collect();
            phase1.push(Phase1Response {
                reader_id: r.reader_id.clone(),
                case_id: case.case_id.clone(),
                judgments,
                comments: BTreeMap::new(),
                submitted_at: t0,
            });
        }
    }
    let bundle = StudyBundle { readers, cases, phase1, ..Default::default() };
    let export = export_study(&bundle).map_err(|e| e.to_string())?;
    let cfg = BootstrapConfig { iterations: 200, seed: 1, confidence: 0.95 };
    let mut ns = Vec::new();
    for t in ErrorType::ALL {
        let (model, reference) = export.gpt_vs_consensus(t);
        ns.push(agreement_report(&model, &reference, &cfg).map_err(|e| e.to_string())?.n_items);
    }
    ensure(ns == [95, 92, 94], || format!("N = {ns:?}"))?;
    Ok(format!("ties {ties:?} give N = {ns:?}"))
}

/// Library-level run over the fixture corpus; returns every primary output serialized.
fn hermetic_run() -> Result<Vec<u8>, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let mut records = ingest(&repo_fixture("corpus.jsonl")).map_err(|e| err(&e))?;
    let flow = apply_filters(&mut records, &FilterCriteria::default());
    let sizes = SplitSizes { analysis: 10, reader: 12, prompt: 3 };
    let splits = sample_splits(&records, &sizes, 7).map_err(|e| err(&e))?;
    let reader_cases: Vec<CaseInput> = records
        .iter()
        .zip(&splits)
        .filter(|(_, s)| s.split == Split::ReaderStudy)
        .map(|(r, _)| CaseInput::from(&r.pair))
        .collect();

    let client = ReplayClient::from_path(&repo_fixture("replay.json")).map_err(|e| err(&e))?;
    let config = PipelineConfig { backoff: Backoff { initial: Duration::ZERO, ..Backoff::default() }, ..PipelineConfig::default() };
    let mut store = ResultsStore::in_memory();
    let summary = run_feedback_pipeline(&reader_cases, &client, &config, &mut store).map_err(|e| err(&e))?;
    if summary.ok_rows != 3 * reader_cases.len() {
        return Err(format!("pipeline summary {summary:?}"));
    }

    let bundle = StudyBundle {
        readers: panel(),
        cases: build_cases(&reader_cases, &store.results()),
        ..Default::default()
    };
    let tick = AtomicI64::new(0);
    let mut study = StudyStore::new(bundle)
        .map_err(|e| err(&e))?
        .with_clock(move || Utc.timestamp_opt(1_700_000_000 + tick.fetch_add(1, Ordering::SeqCst), 0).unwrap());
    for (ri, r) in panel().iter().enumerate() {
        for (ci, c) in reader_cases.iter().enumerate() {
            let judgments = ErrorType::ALL.iter().enumerate().map(|(t, &e)| (e, (ri + ci + t) % 3 != 0)).collect();
            let sub = Phase1Submission { reader_id: r.reader_id.clone(), judgments, comments: BTreeMap::new() };
            study.submit_phase1(&c.case_id, sub).map_err(|e| err(&e))?;
            let helpful = ErrorType::ALL.iter().map(|&e| (e, (ri * 3 + ci) % 4 != 0)).collect();
            let sub = Phase2Submission { reader_id: r.reader_id.clone(), helpful, comments: BTreeMap::new() };
            study.submit_phase2(&c.case_id, sub).map_err(|e| err(&e))?;
        }
    }
    let export = export_study(study.bundle()).map_err(|e| err(&e))?;

    let cfg = BootstrapConfig { iterations: 1000, seed: 5, confidence: 0.95 };
    let sub_cfg = SubstitutionConfig { bootstrap: cfg, ..SubstitutionConfig::default() };
    let mut stats = Vec::new();
    for t in ErrorType::ALL {
        let (model, reference) = export.gpt_vs_consensus(t);
        let agreement = agreement_report(&model, &reference, &cfg).map_err(|e| err(&e))?;
        let human = export.human_matrix(t);
        let alpha = krippendorff_alpha(&human).map_err(|e| err(&e))?;
        let delta = substitution_delta(&human, &export.gpt_column(t), &sub_cfg).map_err(|e| err(&e))?;
        stats.push(serde_json::json!({ "agreement": agreement, "alpha": alpha, "delta": delta }));
    }
    // zero latency before comparing runs
    let results: Vec<_> = store.results().into_iter().map(|r| FeedbackResult { latency_ms: 0, ..r }).collect();
    let helpfulness = helpfulness_summary(&helpfulness_votes(study.bundle()), true, &cfg).map_err(|e| err(&e))?;
    let out = serde_json::json!({
        "flow": flow,
        "splits": splits,
        "results": results,
        "export": export,
        "stats": stats,
        "helpfulness": helpfulness,
    });
    Ok(serde_json::to_vec(&out).unwrap())
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let first = hermetic_run()?;
    let second = hermetic_run()?;
    ensure(first == second, || "two runs produced different outputs".into())?;
    let took = within_budget(start, E2E_BUDGET)?;
    Ok(format!("two runs byte-identical ({} bytes) in {took:?}", first.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("kappa reconstruction", kappa_reconstruction),
        ("alpha oracle equivalence", alpha_oracle_equivalence),
        ("substitution delta", substitution_delta_checks),
        ("bootstrap determinism", bootstrap_determinism),
        ("rule oracle fixtures", rule_oracle_fixtures),
        ("parser fixtures", parser_fixtures),
        ("filter semantics", filter_semantics),
        ("feedback grammar", feedback_grammar),
        ("consensus ties", consensus_ties),
        ("end-to-end hermetic run", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
