use clap::CommandFactory;
use serde::Serialize;
use serde_json::{json, Value};
use tad_core::bench::{SyntheticSpec, DEFAULT_WINDOW};
use tad_core::PipelineConfig;

use crate::args::Cli;

#[derive(Serialize)]
struct Flag {
    name: String,
    long: Option<String>,
    short: Option<char>,
    help: Option<String>,
    takes_value: bool,
    default: Option<String>,
    possible_values: Vec<String>,
    required: bool,
    env: Option<String>,
}

fn flags(cmd: &clap::Command) -> Vec<Flag> {
    cmd.get_arguments()
        .filter(|a| !matches!(a.get_id().as_str(), "help" | "version"))
        .map(|a| {
            let takes_value = a.get_action().takes_values();
            let default = if takes_value {
                let d: Vec<String> = a
                    .get_default_values()
                    .iter()
                    .map(|v| v.to_string_lossy().into_owned())
                    .collect();
                (!d.is_empty()).then(|| d.join(","))
            } else {
                Some("false".to_string())
            };
            Flag {
                name: a.get_id().to_string(),
                long: a.get_long().map(str::to_string),
                short: a.get_short(),
                help: a.get_help().map(|h| h.to_string()),
                takes_value,
                default,
                possible_values: a
                    .get_possible_values()
                    .iter()
                    .map(|v| v.get_name().to_string())
                    .collect(),
                required: a.is_required_set(),
                env: a.get_env().map(|e| e.to_string_lossy().into_owned()),
            }
        })
        .collect()
}

/// Every subcommand with its flags and defaults, plus the library defaults.
pub fn schema() -> Value {
    let cli = Cli::command();
    let commands: Vec<Value> = cli
        .get_subcommands()
        .map(|c| {
            json!({
                "name": c.get_name(),
                "about": c.get_about().map(|a| a.to_string()),
                "flags": flags(c),
            })
        })
        .collect();
    json!({
        "tool": cli.get_name(),
        "global_flags": flags(&cli),
        "commands": commands,
        "defaults": {
            "pipeline": PipelineConfig::<f64>::default(),
            "synthetic": SyntheticSpec::default(),
            "window": DEFAULT_WINDOW,
        },
    })
}
