//! Model feedback over a corpus and common error discovery.

use std::time::Duration;

use draftcheck_core::feedback::{
    discover_common_errors, run_feedback_pipeline, Backoff, CaseInput, ChatClient, DiscoveryConfig, HttpChatClient,
    PipelineConfig, ReplayClient, RequestParams, ResultsStore,
};

use crate::args::{ClientArgs, ClientKind, DiscoverArgs, FeedbackArgs};
use crate::output::{prepare_out, print_json, read_lines, require_file, usage, write_json};

/// Checks client flags without building anything.
fn validate_client(c: &ClientArgs) -> anyhow::Result<()> {
    match c.client {
        ClientKind::Http => {
            if c.endpoint.is_none() || c.model.is_none() {
                return Err(usage("--client http needs --endpoint and --model"));
            }
        }
        ClientKind::Replay => match &c.replay {
            Some(p) => require_file(p)?,
            None => return Err(usage("--client replay needs --replay")),
        },
    }
    if c.concurrency == 0 {
        return Err(usage("--concurrency must be at least 1"));
    }
    Ok(())
}

fn build_client(c: &ClientArgs) -> anyhow::Result<Box<dyn ChatClient>> {
    Ok(match c.client {
        ClientKind::Http => Box::new(HttpChatClient::from_env(
            c.endpoint.clone().unwrap_or_default(),
            c.model.clone().unwrap_or_default(),
            &c.api_key_env,
        )),
        ClientKind::Replay => Box::new(ReplayClient::from_path(c.replay.as_deref().unwrap_or_else(|| unreachable!()))?),
    })
}

fn pipeline_config(c: &ClientArgs) -> PipelineConfig {
    PipelineConfig {
        concurrency_limit: c.concurrency,
        max_retries: c.max_retries,
        backoff: Backoff {
            initial: Duration::from_millis(c.backoff_ms),
            ..Backoff::default()
        },
        params: RequestParams {
            temperature: c.temperature,
            max_tokens: c.max_tokens,
            timeout: Duration::from_secs(c.timeout_secs),
        },
    }
}

fn cases(lines: Vec<draftcheck_core::corpus::CorpusLine>) -> Vec<CaseInput> {
    lines
        .into_iter()
        .map(|l| CaseInput {
            case_id: l.case_id,
            draft_text: l.draft_text,
            final_text: l.final_text,
        })
        .collect()
}

pub fn feedback(a: FeedbackArgs) -> anyhow::Result<()> {
    require_file(&a.input.corpus)?;
    validate_client(&a.client)?;
    let out = prepare_out(&a.out.out)?;
    let client = build_client(&a.client)?;
    let inputs = cases(read_lines(&a.input.corpus, &a.select)?);
    let mut store = ResultsStore::open(&out.join("results.jsonl"))?;
    let summary = run_feedback_pipeline(&inputs, &*client, &pipeline_config(&a.client), &mut store)?;
    write_json(&out.join("feedback_summary.json"), &summary)?;
    print_json(&summary)
}

pub fn discover(a: DiscoverArgs) -> anyhow::Result<()> {
    require_file(&a.input.corpus)?;
    validate_client(&a.client)?;
    let out = prepare_out(&a.out.out)?;
    let client = build_client(&a.client)?;
    let inputs = cases(read_lines(&a.input.corpus, &a.select)?);
    let config = DiscoveryConfig {
        pipeline: pipeline_config(&a.client),
        context_budget_chars: a.context_budget,
    };
    let report = discover_common_errors(&inputs, &*client, &config)?;
    write_json(&out.join("discovery.json"), &report)?;
    print_json(&report.errors)
}
