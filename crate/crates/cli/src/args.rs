use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use draftcheck_core::corpus::Split;
use draftcheck_core::stats::PermutationMethod;

#[derive(Debug, Parser)]
#[command(name = "draftcheck", version, about = "Draft-vs-final radiology report checks and reader-study analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a corpus file and write it back normalized.
    Ingest(IngestArgs),
    /// Apply exclusion filters and report the flow summary.
    Filter(FilterArgs),
    /// Filter, then draw the analysis, reader-study and prompt splits.
    Sample(SampleArgs),
    /// Run the BI-RADS rule oracle over each draft.
    Lint(LintArgs),
    /// Word diff between each draft and its final report.
    Diff(DiffArgs),
    /// Run the detection prompts over a corpus, resuming from the results store.
    Feedback(FeedbackArgs),
    /// Two-step common error discovery.
    DiscoverErrors(DiscoverArgs),
    #[command(subcommand)]
    Study(StudyCommand),
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Debug, Args)]
pub struct CorpusInput {
    /// Corpus JSONL (raw or annotated).
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutDir {
    /// Directory that receives all output files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    /// Pairs with edit distance at or below this are excluded.
    #[arg(long, default_value_t = 50)]
    pub threshold: usize,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[arg(long, default_value_t = 50)]
    pub threshold: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub analysis: usize,
    #[arg(long, default_value_t = 100)]
    pub reader: usize,
    #[arg(long, default_value_t = 15)]
    pub prompt: usize,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    CommonErrorAnalysis,
    ReaderStudy,
    PromptSample,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::CommonErrorAnalysis => Split::CommonErrorAnalysis,
            SplitArg::ReaderStudy => Split::ReaderStudy,
            SplitArg::PromptSample => Split::PromptSample,
        }
    }
}

#[derive(Debug, Args)]
pub struct Selection {
    /// Keep only records annotated with this split.
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    /// Skip records annotated with an exclusion.
    #[arg(long)]
    pub eligible_only: bool,
}

#[derive(Debug, Args)]
pub struct LintArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[command(flatten)]
    pub select: Selection,
    /// Rule table JSON replacing the built-in one.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[command(flatten)]
    pub select: Selection,
    /// Only this case.
    #[arg(long)]
    pub case: Option<String>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClientKind {
    Http,
    Replay,
}

#[derive(Debug, Args)]
pub struct ClientArgs {
    #[arg(long, value_enum, default_value_t = ClientKind::Http)]
    pub client: ClientKind,
    /// Chat-completions URL (http client).
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = draftcheck_core::feedback::client::DEFAULT_API_KEY_ENV)]
    pub api_key_env: String,
    /// Replay table JSON (replay client).
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f32,
    #[arg(long, default_value_t = 1024)]
    pub max_tokens: u32,
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
    /// First retry delay; later retries double it.
    #[arg(long, default_value_t = 500)]
    pub backoff_ms: u64,
}

#[derive(Debug, Args)]
pub struct FeedbackArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[command(flatten)]
    pub select: Selection,
    #[command(flatten)]
    pub client: ClientArgs,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[command(flatten)]
    pub select: Selection,
    #[command(flatten)]
    pub client: ClientArgs,
    /// Largest aggregation prompt, in characters, before summaries are chunked.
    #[arg(long, default_value_t = 400_000)]
    pub context_budget: usize,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Subcommand)]
pub enum StudyCommand {
    /// Build a study bundle from a corpus split and feedback results.
    Init(StudyInitArgs),
    /// Serve the reader-study HTTP API.
    Serve(StudyServeArgs),
    /// Write rating matrices and consensus for a bundle and its event log.
    Export(StudyExportArgs),
}

#[derive(Debug, Args)]
pub struct StudyInitArgs {
    #[command(flatten)]
    pub input: CorpusInput,
    #[arg(long, value_enum, default_value_t = SplitArg::ReaderStudy)]
    pub split: SplitArg,
    /// Results store written by `feedback`.
    #[arg(long)]
    pub results: PathBuf,
    /// JSON array of readers.
    #[arg(long)]
    pub readers: PathBuf,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct StudyServeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Event log; defaults to events.jsonl in --out.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Defaults to the bundle's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, Args)]
pub struct StudyExportArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct StatsCommon {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write the result as JSON into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Model vs attending consensus: agreement, kappa, precision, recall, F1.
    Agreement(AgreementArgs),
    /// Krippendorff's alpha for a matrix, or per error type and reader group.
    Alpha(AlphaArgs),
    /// Change in alpha when the model replaces each reader.
    Delta(DeltaArgs),
    /// Proportion of feedback rated helpful.
    Helpfulness(HelpfulnessArgs),
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    /// export.json written by `study export`.
    #[arg(long)]
    pub export: PathBuf,
    #[command(flatten)]
    pub common: StatsCommon,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct MatrixSource {
    /// Rating matrix CSV.
    #[arg(long, group = "source")]
    pub matrix: Option<PathBuf>,
    /// export.json written by `study export`.
    #[arg(long, group = "source")]
    pub export: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[command(flatten)]
    pub common: StatsCommon,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// Model column in --matrix; the remaining columns are the readers.
    #[arg(long, default_value = draftcheck_core::study::GPT_RATER)]
    pub model_column: String,
    #[arg(long, default_value_t = 10_000)]
    pub permutation_iterations: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[command(flatten)]
    pub common: StatsCommon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    MonteCarlo,
}

impl From<MethodArg> for PermutationMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => PermutationMethod::Auto,
            MethodArg::Exact => PermutationMethod::Exact,
            MethodArg::MonteCarlo => PermutationMethod::MonteCarlo,
        }
    }
}

#[derive(Debug, Args)]
pub struct HelpfulnessArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Add attending-only and resident-only rows.
    #[arg(long)]
    pub stratify: bool,
    #[command(flatten)]
    pub common: StatsCommon,
}
