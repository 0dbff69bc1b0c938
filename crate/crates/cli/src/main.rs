mod args;
mod commands;

use std::collections::HashSet;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{CommandFactory, Parser};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use args::{Cli, Command, Merge};

fn long_flags(cmd: &clap::Command, out: &mut HashSet<String>) {
    for a in cmd.get_arguments() {
        if let Some(l) = a.get_long() {
            out.insert(l.to_string());
        }
    }
    for sub in cmd.get_subcommands() {
        long_flags(sub, out);
    }
}

fn read_config(path: &Path) -> anyhow::Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = value else {
        bail!("config {} must hold a JSON object", path.display());
    };
    let mut known = HashSet::new();
    long_flags(&Cli::command(), &mut known);
    for key in ["config", "help", "version"] {
        known.remove(key);
    }
    for key in map.keys() {
        if !known.contains(key) {
            bail!("config {}: unknown key {key:?}", path.display());
        }
    }
    Ok(map)
}

/// Fills the values missing from `cmd` with those in the config file.
fn with_config<T: Merge + DeserializeOwned>(mut cmd: T, config: &Option<Map<String, Value>>) -> anyhow::Result<T> {
    if let Some(map) = config {
        let from_file: T = serde_json::from_value(Value::Object(map.clone()))
            .context("config file has a value of the wrong type")?;
        cmd.merge(from_file);
    }
    Ok(cmd)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = cli.config.as_deref().map(read_config).transpose()?;
    match cli.command {
        Command::Train(c) => commands::train(with_config(c, &config)?),
        Command::Eval(c) => commands::eval(with_config(c, &config)?),
        Command::Build(c) => commands::build(with_config(*c, &config)?),
        Command::SuggestV(c) => commands::suggest_v(with_config(c, &config)?),
        Command::Communities(c) => commands::communities(with_config(c, &config)?),
        Command::Serve(c) => commands::serve(with_config(c, &config)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
