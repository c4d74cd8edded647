#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Format};
use commands::{Failure, EXIT_CHECK_FAILED, EXIT_INPUT};

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
        }
    }
}

fn render(format: Format, value: &Value, records: &[serde_json::Map<String, Value>]) -> Result<String, Failure> {
    match format {
        Format::Json => output::to_json(value).map_err(|e| Failure::input(e.to_string())),
        Format::Csv => output::to_csv(records).map_err(|e| Failure::input(e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfg = commands::resolve_config(cli)?;
    if cli.dry_run {
        let echo = json!({
            "command": commands::command_name(&cli.command),
            "config": cfg,
            "request": commands::request(cli)?,
        });
        let text = match cli.format {
            Format::Json => output::to_json(&echo).map_err(|e| Failure::input(e.to_string()))?,
            Format::Csv => {
                let rec = cfg
                    .to_entries()
                    .into_iter()
                    .map(|(k, v)| (k, Value::String(v)))
                    .collect();
                output::to_csv(&[rec]).map_err(|e| Failure::input(e.to_string()))?
            }
        };
        emit(cli, &text)?;
        return Ok(true);
    }
    let outcome = parisian_core::mc::with_thread_cap(|| commands::execute(&cfg, &cli.command))??;
    let value = Value::Array(outcome.records.iter().cloned().map(Value::Object).collect());
    emit(cli, &render(cli.format, &value, &outcome.records)?)?;
    Ok(!outcome.failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT as u8),
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED as u8),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
