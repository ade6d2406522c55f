mod args;
mod commands;
mod report;
mod schema;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use log::LevelFilter;

use args::{Cli, Command};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

fn classify(e: &tad_core::Error) -> u8 {
    match e {
        _ if e.is_resource_limit() => EXIT_RESOURCE,
        tad_core::Error::Parameter(_) => EXIT_USAGE,
        tad_core::Error::Context { source, .. } => classify(source),
        _ => EXIT_DATA,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|c| c.downcast_ref::<tad_core::Error>())
        .map_or(EXIT_DATA, classify)
}

fn init_logging(cli: &Cli) {
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => LevelFilter::Error,
        (false, 0) => LevelFilter::Warn,
        (false, 1) => LevelFilter::Info,
        (false, 2) => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    init_logging(&cli);
    let result = match &cli.command {
        Command::Detect(a) => commands::detect(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Eval(a) => commands::eval(a),
        Command::Diagram(a) => commands::diagram(a),
        Command::DistanceSeries(a) => commands::distance_series(a),
        Command::ConfigSchema(a) => commands::config_schema(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
