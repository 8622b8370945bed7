//! Run reports, CSV output and error reporting.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use common_learning::{Error, InfoStructure, ValidationReport};
use serde::Serialize;
use serde_json::{json, Value};

use crate::Context;

pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub detail: Option<Value>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            kind: "usage",
            message: message.into(),
            detail: None,
        }
    }

    pub fn invalid(message: impl Into<String>, detail: Option<Value>) -> Self {
        CliError {
            code: 1,
            kind: "validation",
            message: message.into(),
            detail,
        }
    }

    pub fn internal(message: impl std::fmt::Display) -> Self {
        CliError {
            code: 3,
            kind: "internal",
            message: message.to_string(),
            detail: None,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = if e.is_capacity() {
            (2, "capacity")
        } else {
            match e {
                Error::NotStochastic(_) | Error::PartitionMismatch(..) => (3, "internal"),
                Error::Invalid(_) => (1, "validation"),
                Error::Parse { .. } | Error::Malformed(_) => (1, "parse"),
                _ => (1, "argument"),
            }
        };
        CliError {
            code,
            kind,
            message: e.to_string(),
            detail: None,
        }
    }
}

pub fn fail(e: &CliError) -> ExitCode {
    let mut v = json!({ "error": { "kind": e.kind, "exit_code": e.code, "message": e.message } });
    if let Some(d) = &e.detail {
        v["error"]["detail"] = d.clone();
    }
    eprintln!("{}", serde_json::to_string_pretty(&v).unwrap_or_else(|_| e.message.clone()));
    ExitCode::from(e.code)
}

/// Validation violations with state labels and 1-based agents.
pub fn violations(info: &InfoStructure, r: &ValidationReport) -> Value {
    r.violations
        .iter()
        .map(|v| {
            json!({
                "check": v.check,
                "state": v.state.map(|s| info.state_label(s).to_string()),
                "agents": v.agents.map(|(a, b)| [a + 1, b + 1]),
                "signals": v.signals,
                "message": v.message,
            })
        })
        .collect()
}

/// Shift the named integer fields to 1-based numbering, at any depth.
pub fn one_based(v: &mut Value, keys: &[&str]) {
    match v {
        Value::Object(map) => {
            for (k, x) in map.iter_mut() {
                if keys.contains(&k.as_str()) {
                    if let Some(n) = x.as_u64() {
                        *x = json!(n + 1);
                        continue;
                    }
                }
                one_based(x, keys);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| one_based(x, keys)),
        _ => {}
    }
}

/// Replace integer state indices under the named fields with labels.
pub fn label_states(v: &mut Value, info: &InfoStructure, keys: &[&str]) {
    match v {
        Value::Object(map) => {
            for (k, x) in map.iter_mut() {
                if keys.contains(&k.as_str()) {
                    if let Some(s) = x.as_u64().filter(|&s| (s as usize) < info.num_states()) {
                        *x = json!(info.state_label(s as usize));
                        continue;
                    }
                }
                label_states(x, info, keys);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| label_states(x, info, keys)),
        _ => {}
    }
}

pub enum Table {
    Rows { header: Vec<String>, rows: Vec<Vec<String>> },
    /// Already-encoded CSV.
    Raw(Vec<u8>),
}

#[derive(Serialize)]
pub struct ScenarioInfo {
    pub name: Option<String>,
    pub digest: String,
    pub source: String,
}

#[derive(Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub subcommand: String,
    pub scenario: ScenarioInfo,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub timing: Value,
    pub slack: f64,
    pub payload: Value,
}

impl RunReport {
    pub fn new(argv: &[String], sub: &str, ctx: &Context, payload: Value, seeds: &[u64], started: Instant) -> Self {
        RunReport {
            tool: "common-learning",
            version: env!("CARGO_PKG_VERSION"),
            command: argv.to_vec(),
            subcommand: sub.into(),
            scenario: ScenarioInfo {
                name: ctx.scenario.name.clone(),
                digest: ctx.scenario.digest(),
                source: ctx.source.clone(),
            },
            seeds: seeds.to_vec(),
            threads: common_learning::parallel::threads(),
            timing: json!({ "elapsed_ms": started.elapsed().as_secs_f64() * 1e3 }),
            slack: ctx.slack,
            payload,
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("cannot write {}: {e}", path.display()))
}

fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    match table {
        Table::Raw(bytes) => std::fs::write(path, bytes).map_err(|e| io(path, e)),
        Table::Rows { header, rows } => {
            let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
            w.write_record(header).map_err(|e| io(path, e))?;
            for r in rows {
                w.write_record(r).map_err(|e| io(path, e))?;
            }
            w.flush().map_err(|e| io(path, e))
        }
    }
}

/// Report to `out` or stdout; the table to `csv`, else beside `out`.
pub fn emit(report: &RunReport, table: Option<&Table>, out: Option<&Path>, csv: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(CliError::internal)?;
    match out {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| io(p, e))?;
            writeln!(f, "{text}").map_err(|e| io(p, e))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(io(Path::new("stdout"), e)),
                _ => {}
            }
        }
    }
    let target: Option<PathBuf> = csv.map(Path::to_path_buf).or_else(|| out.map(|p| p.with_extension("csv")));
    if let (Some(table), Some(path)) = (table, target) {
        write_table(table, &path)?;
    }
    Ok(())
}
