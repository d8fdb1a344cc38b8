mod args;
mod commands;

use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Map, Value};

use args::{Cli, Options};

const SCHEMA: u32 = 1;

fn header(command: &str, opts: &Options, status: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(opts.seed));
    m.insert("model".into(), json!(opts.model.as_ref().map(|p| p.display().to_string())));
    m.insert("status".into(), json!(status));
    m
}

fn error_value(kind: &str, message: &str) -> Value {
    json!({ "kind": kind, "message": message })
}

fn write_artifacts(out: &Path, report: &str, csv: Option<&str>) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("report.json"), report)?;
    if let Some(csv) = csv {
        std::fs::write(out.join("trajectory.csv"), csv)?;
    }
    Ok(())
}

fn emit(report: Map<String, Value>, out: Option<&Path>, csv: Option<&str>, code: u8) -> ExitCode {
    let mut text = serde_json::to_string_pretty(&Value::Object(report)).expect("reports serialize");
    text.push('\n');
    print!("{text}");
    if let Some(out) = out {
        if let Err(e) = write_artifacts(out, &text, csv) {
            eprintln!("quadham: cannot write to {}: {e}", out.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let mut report = Map::new();
            report.insert("schema".into(), json!(SCHEMA));
            report.insert("status".into(), json!("error"));
            report.insert("error".into(), error_value("usage", e.to_string().trim()));
            return emit(report, None, None, 2);
        }
    };
    let name = cli.command.name();
    let out = cli.opts.out.as_path();
    match commands::run(cli.command, &cli.opts) {
        Ok(outcome) => {
            let status = if outcome.passed { "pass" } else { "fail" };
            let mut report = header(name, &cli.opts, status);
            report.extend(outcome.body);
            emit(report, Some(out), outcome.csv.as_deref(), if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            let (status, code) = if e.is_check_failure() { ("fail", 1) } else { ("error", 2) };
            let mut report = header(name, &cli.opts, status);
            report.insert("error".into(), error_value(e.kind(), &e.to_string()));
            emit(report, Some(out), None, code)
        }
    }
}
