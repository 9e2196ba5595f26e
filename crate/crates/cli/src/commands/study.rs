//! Reader-study bundle creation, serving and export.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;

use anyhow::Context;

use draftcheck_core::feedback::{CaseInput, ResultsStore};
use draftcheck_core::study::{
    build_cases, export_study, server, theme_tally, ConsensusOutcome, Reader, StudyBundle, StudyStore,
};

use crate::args::{Selection, StudyExportArgs, StudyInitArgs, StudyServeArgs};
use crate::output::{load_study, prepare_out, print_json, read_json, read_lines, require_file, usage, write_json};

pub fn init(a: StudyInitArgs) -> anyhow::Result<()> {
    for p in [&a.input.corpus, &a.results, &a.readers] {
        require_file(p)?;
    }
    let out = prepare_out(&a.out.out)?;
    let select = Selection {
        split: Some(a.split),
        eligible_only: false,
    };
    let pairs: Vec<CaseInput> = read_lines(&a.input.corpus, &select)?
        .into_iter()
        .map(|l| CaseInput {
            case_id: l.case_id,
            draft_text: l.draft_text,
            final_text: l.final_text,
        })
        .collect();
    let results = ResultsStore::open(&a.results)?.results();
    let readers: Vec<Reader> = read_json(&a.readers)?;
    if readers.is_empty() {
        anyhow::bail!("reader list is empty");
    }
    let bundle = StudyBundle {
        readers,
        cases: build_cases(&pairs, &results),
        ..StudyBundle::default()
    };
    // validates reader and case references
    StudyStore::new(bundle.clone())?;
    write_json(&out.join("study.json"), &bundle)?;
    print_json(&serde_json::json!({
        "cases": bundle.cases.len(),
        "servable": bundle.cases.iter().filter(|c| c.is_servable()).count(),
        "readers": bundle.readers.len(),
    }))
}

pub fn serve(a: StudyServeArgs) -> anyhow::Result<()> {
    require_file(&a.bundle)?;
    let log = match (&a.log, &a.out) {
        (Some(log), _) => log.clone(),
        (None, out) => {
            let dir = match out {
                Some(d) => prepare_out(d)?,
                None => a.bundle.parent().map(|p| p.to_path_buf()).unwrap_or_default(),
            };
            dir.join("events.jsonl")
        }
    };
    if let Some(parent) = log.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            return Err(usage(format!("log directory {} does not exist", parent.display())));
        }
    }
    let bundle: StudyBundle = read_json(&a.bundle)?;
    let store = StudyStore::open(bundle, &log)?;
    let addr = SocketAddr::new(a.host, a.port);
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(server::serve(store, addr, |bound| {
        println!("{}", serde_json::json!({ "listening": format!("http://{bound}"), "log": log.display().to_string() }));
        let _ = std::io::stdout().flush();
    }))
    .with_context(|| format!("serving on {addr}"))?;
    Ok(())
}

pub fn export(a: StudyExportArgs) -> anyhow::Result<()> {
    require_file(&a.bundle)?;
    if let Some(l) = &a.log {
        require_file(l)?;
    }
    let out = prepare_out(&a.out.out)?;
    let bundle = load_study(&a.bundle, a.log.as_deref())?;
    let export = export_study(&bundle)?;
    fs::write(out.join("export.json"), export.to_json() + "\n")?;
    for (t, m) in &export.matrices {
        fs::write(out.join(format!("matrix_{t}.csv")), m.to_csv())?;
    }
    write_json(&out.join("themes.json"), &theme_tally(&export.bundle.themes))?;

    let mut summary = BTreeMap::new();
    for (t, rows) in &export.consensus {
        let count = |o: ConsensusOutcome| rows.iter().filter(|r| r.outcome == o).count();
        summary.insert(
            t.to_string(),
            serde_json::json!({
                "items": rows.len(),
                "yes": count(ConsensusOutcome::Yes),
                "no": count(ConsensusOutcome::No),
                "tie": count(ConsensusOutcome::Tie),
                "missing": count(ConsensusOutcome::Missing),
            }),
        );
    }
    print_json(&summary)
}
