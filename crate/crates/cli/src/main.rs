//! `draftcheck`: one entry point for corpus preparation, model feedback,
//! the reader study and its statistics.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, StatsCommand, StudyCommand};
use output::{error_code, UsageError};

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(a) => commands::corpus::ingest(a),
        Command::Filter(a) => commands::corpus::filter(a),
        Command::Sample(a) => commands::corpus::sample(a),
        Command::Lint(a) => commands::corpus::lint(a),
        Command::Diff(a) => commands::corpus::diff(a),
        Command::Feedback(a) => commands::feedback::feedback(a),
        Command::DiscoverErrors(a) => commands::feedback::discover(a),
        Command::Study(StudyCommand::Init(a)) => commands::study::init(a),
        Command::Study(StudyCommand::Serve(a)) => commands::study::serve(a),
        Command::Study(StudyCommand::Export(a)) => commands::study::export(a),
        Command::Stats(StatsCommand::Agreement(a)) => commands::stats::agreement(a),
        Command::Stats(StatsCommand::Alpha(a)) => commands::stats::alpha(a),
        Command::Stats(StatsCommand::Delta(a)) => commands::stats::delta(a),
        Command::Stats(StatsCommand::Helpfulness(a)) => commands::stats::helpfulness(a),
    }
}

fn emit_error(code: &str, message: &str) {
    let body = serde_json::json!({ "error": code, "message": message });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            emit_error("usage", e.render().to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(error_code(&e), &format!("{e:#}"));
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
