mod args;
mod commands;
mod table;

use std::process::ExitCode;

use clap::Parser;
use gazecast::ErrorCategory;

use args::{Cli, Command};

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Io => 1,
        ErrorCategory::Schema => 2,
        ErrorCategory::Validation => 3,
        ErrorCategory::Degenerate => 4,
        ErrorCategory::Solver => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GAZECAST_LOG", "info"))
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Extract(a) => commands::extract(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Rank(a) => commands::rank(a),
        Command::Select(a) => commands::select(a),
        Command::Synth(a) => commands::synth(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}
