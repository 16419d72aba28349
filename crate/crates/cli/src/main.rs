mod args;
mod commands;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{merge, read_config, Cli, Command, FileConfig, Format};
use commands::RunContext;

/// 2 input error, 3 degenerate statistics (also an inconclusive test),
/// 4 infeasible parameters.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<degbias::Error>() {
            return if err.is_degenerate_statistics() {
                3
            } else if matches!(err, degbias::Error::InfeasibleParameter(_)) {
                4
            } else {
                2
            };
        }
    }
    2
}

fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let ctx = RunContext {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        format: cli.format.or(file.format).unwrap_or(Format::Json),
    };
    let output = cli.output.clone().or(file.output.clone());
    let section = file.sections.get(cli.command.name());
    if let Some(bad) = file.sections.keys().find(|k| {
        !["generate", "profile", "estimate", "test", "correct", "simulate", "analyze-directed"].contains(&k.as_str())
    }) {
        anyhow::bail!("unknown config section '{bad}'");
    }
    let mut status = 0;
    let text = match &cli.command {
        Command::Generate(a) => commands::generate(merge(a, section)?, &ctx)?,
        Command::Profile(a) => commands::profile(merge(a, section)?, &ctx)?,
        Command::Estimate(a) => commands::estimate(merge(a, section)?, &ctx)?,
        Command::Test(a) => {
            let (text, inconclusive) = commands::test(merge(a, section)?, &ctx)?;
            if inconclusive {
                eprintln!("warning: test inconclusive; the report is written but the exit status is 3");
                status = 3;
            }
            text
        }
        Command::Correct(a) => commands::correct(merge(a, section)?, &ctx)?,
        Command::Simulate(a) => commands::simulate(merge(a, section)?, &ctx)?,
        Command::AnalyzeDirected(a) => commands::analyze_directed(merge(a, section)?, &ctx)?,
    };
    output::emit(&text, output.as_deref())?;
    Ok(status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
