//! Parameter sweeps over a program template.
//!
//! A parameter is a dotted path into the program document, with 1-based
//! indices into arrays: `system.alpha`, `steps.3.lindblad.kappa`. When the
//! path ends at an array every element is set to the swept value, so
//! `system.alpha` moves both modes of a two-mode program together.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use toml::Value;

use crate::error::RunError;
use crate::exec::{execute, RunOutput};
use crate::output::{format_f64, write_atomic, write_run, DEFAULT_STEM};
use crate::profile::ToleranceProfile;
use crate::program::parse_program;

/// Outcome of one sweep point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub value: f64,
    pub outcome: Result<PointSummary, PointFailure>,
}

#[derive(Debug, Clone)]
pub struct PointSummary {
    pub truncation: Vec<usize>,
    pub scalars: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct PointFailure {
    pub exit_code: u8,
    pub message: String,
}

/// Substitutes `value` at `path` in the template and returns the new document.
pub fn substitute(template: &Value, path: &str, value: f64) -> Result<Value, RunError> {
    let mut doc = template.clone();
    let mut node = &mut doc;
    for key in path.split('.') {
        node = match node {
            Value::Table(t) => t.get_mut(key),
            Value::Array(a) => key.parse::<usize>().ok().filter(|&i| i >= 1).and_then(|i| a.get_mut(i - 1)),
            _ => None,
        }
        .ok_or_else(|| RunError::Parse(format!("sweep parameter `{path}` does not exist in the program")))?;
    }
    match node {
        Value::Array(items) if !items.is_empty() => {
            for item in items.iter_mut() {
                *item = replace(item, value, path)?;
            }
        }
        other => *other = replace(other, value, path)?,
    }
    Ok(doc)
}

fn replace(old: &Value, value: f64, path: &str) -> Result<Value, RunError> {
    match old {
        Value::Float(_) => Ok(Value::Float(value)),
        Value::Integer(_) if value.fract() == 0.0 && value.abs() < 9.0e15 => Ok(Value::Integer(value as i64)),
        Value::Integer(_) => Err(RunError::Parse(format!("sweep parameter `{path}` is an integer, got {value}"))),
        _ => Err(RunError::Parse(format!("sweep parameter `{path}` is not numeric"))),
    }
}

/// Parses the template and checks the parameter against it. Fails before
/// anything runs on an empty value list or a missing parameter.
pub fn prepare(template_text: &str, path: &str, values: &[f64], strict: bool) -> Result<Value, RunError> {
    if values.is_empty() {
        return Err(RunError::Parse("sweep needs at least one value".into()));
    }
    parse_program(template_text, strict)?;
    let template: Value =
        template_text.parse().map_err(|e: toml::de::Error| RunError::Parse(e.message().to_string()))?;
    substitute(&template, path, values[0])?;
    Ok(template)
}

fn run_point(
    template: &Value,
    path: &str,
    value: f64,
    strict: bool,
    profile: ToleranceProfile,
) -> Result<RunOutput, RunError> {
    let doc = substitute(template, path, value)?;
    let text = toml::to_string(&doc).map_err(|e| RunError::Parse(e.to_string()))?;
    let (program, _) = parse_program(&text, strict)?;
    execute(&program, profile)
}

/// Runs every point on up to `threads` workers and writes `point_NNN/`
/// directories plus `sweep.csv` under `out`. Point failures are recorded,
/// not propagated; only I/O on the aggregate is fatal.
pub fn run_sweep(
    template: &Value,
    path: &str,
    values: &[f64],
    out: &Path,
    strict: bool,
    profile: ToleranceProfile,
    threads: usize,
) -> Result<Vec<PointResult>, RunError> {
    std::fs::create_dir_all(out)?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<PointResult>>> = Mutex::new(vec![None; values.len()]);
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, values.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= values.len() {
                    break;
                }
                let start = Instant::now();
                let value = values[i];
                let outcome = run_point(template, path, value, strict, profile).and_then(|run| {
                    write_run(&out.join(format!("point_{i:03}")), DEFAULT_STEM, &run, start.elapsed())?;
                    Ok(PointSummary { truncation: run.summary.truncation, scalars: run.summary.scalars })
                });
                let outcome = outcome.map_err(|e| PointFailure { exit_code: e.exit_code(), message: e.to_string() });
                results.lock().expect("no worker panics while holding the lock")[i] =
                    Some(PointResult { value, outcome });
            });
        }
    });
    let results: Vec<PointResult> =
        results.into_inner().expect("workers finished").into_iter().map(|r| r.expect("every point ran")).collect();
    write_atomic(&out.join("sweep.csv"), aggregate_csv(template, path, &results).as_bytes())?;
    Ok(results)
}

/// One row per point in input order: value, status, truncation, then the
/// union of all summary scalars. Failed points leave scalar fields empty.
pub fn aggregate_csv(template: &Value, path: &str, results: &[PointResult]) -> String {
    let keys: BTreeSet<&String> =
        results.iter().filter_map(|r| r.outcome.as_ref().ok()).flat_map(|s| s.scalars.keys()).collect();
    let template = serde_json::to_string(template).expect("TOML values serialize to JSON");
    let mut s = format!("# template {template}\n# parameter {path}\n");
    s.push_str("value,status,truncation");
    for k in &keys {
        s.push(',');
        s.push_str(k);
    }
    s.push('\n');
    for r in results {
        s.push_str(&format_f64(r.value));
        match &r.outcome {
            Ok(p) => {
                let trunc: Vec<String> = p.truncation.iter().map(|n| n.to_string()).collect();
                s.push_str(",ok,");
                s.push_str(&trunc.join(";"));
                for k in &keys {
                    s.push(',');
                    if let Some(v) = p.scalars.get(*k) {
                        s.push_str(&format_f64(*v));
                    }
                }
            }
            Err(f) => {
                s.push_str(&format!(",exit{},", f.exit_code));
                s.push_str(&",".repeat(keys.len()));
            }
        }
        s.push('\n');
    }
    s
}
