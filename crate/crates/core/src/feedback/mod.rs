//! LLM feedback: prompt rendering, pluggable chat clients, the tolerant
//! output parser, the batch pipeline and common-error discovery.

pub mod client;
pub mod discover;
pub mod parse;
pub mod pipeline;
pub mod prompt;

pub use client::{ChatClient, ClientError, FnClient, HttpChatClient, ReplayClient, ReplayRule, RequestParams};
pub use discover::{discover_common_errors, parse_aggregate_output, DiscoveredError, DiscoveryConfig, DiscoveryError, DiscoveryReport};
pub use parse::{parse_diagnosis_feedback, parse_pair_feedback, PairFeedback, ParseFailure, ParsedFlag};
pub use pipeline::{
    run_feedback_pipeline, Backoff, CaseInput, FeedbackResult, Outcome, PipelineConfig, PipelineError, PipelineSummary,
    ResultRow, ResultsStore,
};
pub use prompt::{render_prompt, PromptError, PromptInput, PromptTemplate, TemplateId};
