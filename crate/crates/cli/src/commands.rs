// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use verigate::analysis::{
    condition_report, evaluate_policy, fix_break_table, layer_sweep, oracle_ceiling, trigger_rate_sweep, Metric,
    DEFAULT_SWEEP_RATES,
};
use verigate::report::{self, Document, Table};
use verigate::routing::{apply_policy, calibrate, RoutingPolicy, DEFAULT_CANDIDATE_RATES};
use verigate::{load_dataset, synth, Condition, Dataset};

use crate::args::{ReportKind, SynthArgs};
use crate::config::{resolve_synth, same_file, RunConfig};
use crate::error::CliError;
use crate::output::{write_atomic, Emitter};

/// A result tagged with the split it was computed on.
#[derive(Debug, Serialize)]
struct Labeled<'a, T: Serialize> {
    split: &'a str,
    #[serde(flatten)]
    result: T,
}

struct EvalSet<'a> {
    path: &'a Path,
    label: String,
    data: Dataset,
}

impl EvalSet<'_> {
    fn tag<T>(&self, r: verigate::Result<T>) -> Result<T, CliError> {
        r.map_err(CliError::in_file(self.path))
    }
}

fn load(path: &Path) -> Result<Dataset, CliError> {
    load_dataset(path).map_err(CliError::in_file(path))
}

/// One set per (file, split). Split names shared by several files are
/// prefixed with the file stem.
fn load_eval_sets(paths: &[PathBuf]) -> Result<Vec<EvalSet<'_>>, CliError> {
    if paths.is_empty() {
        return Err(CliError::Input("--eval is required".into()));
    }
    let mut parts = Vec::new();
    for path in paths {
        let ds = load(path)?;
        for split in ds.split_names() {
            parts.push((path, split.clone(), ds.split(&split)));
        }
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (_, split, _) in &parts {
        *seen.entry(split.as_str()).or_default() += 1;
    }
    let shared: Vec<bool> = parts.iter().map(|(_, s, _)| seen[s.as_str()] > 1).collect();
    Ok(parts
        .into_iter()
        .zip(shared)
        .map(|((path, split, data), shared)| {
            let label = if shared {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                format!("{stem}:{split}")
            } else {
                split
            };
            EvalSet { path, label, data }
        })
        .collect())
}

fn check_protocol(config: &RunConfig) -> Result<(), CliError> {
    if let Some(dev) = &config.dev {
        if let Some(eval) = config.eval.iter().find(|e| same_file(dev, e)) {
            return Err(CliError::Protocol(format!(
                "development file {} is also an evaluation file ({}); thresholds must be chosen on held-out data",
                dev.display(),
                eval.display()
            )));
        }
    }
    Ok(())
}

fn emitter(config: &RunConfig) -> Emitter {
    Emitter {
        out: config.out.clone(),
        format: config.format,
    }
}

fn joined(tables: &[Table]) -> String {
    tables.iter().map(Table::render).collect::<Vec<_>>().join("\n")
}

pub fn validate(paths: &[PathBuf]) -> Result<(), CliError> {
    for path in paths {
        let ds = load(path)?;
        let per_condition: Vec<String> = Condition::ALL
            .iter()
            .map(|&c| {
                let outcomes = ds.records().iter().filter(|r| r.outcome(c).is_ok()).count();
                let traces = ds.traces().filter(|t| t.condition == c).count();
                format!("{c} {outcomes}/{traces}")
            })
            .collect();
        println!(
            "{}: ok: {} records in {} split(s) [{}], {} traces, {} layers; outcomes/traces: {}",
            path.display(),
            ds.len(),
            ds.split_names().len(),
            ds.split_names().join(", "),
            ds.trace_count(),
            ds.n_layers().map_or("-".into(), |n| n.to_string()),
            per_condition.join(", ")
        );
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let config = resolve_synth(args)?;
    let ds = synth::generate(&config)?;
    write_atomic(&args.output, ds.to_lines()?.as_bytes())?;
    println!(
        "{}: wrote {} records and {} traces (seed {})",
        args.output.display(),
        ds.len(),
        ds.trace_count(),
        config.seed
    );
    Ok(())
}

fn calibrate_from_dev(config: &RunConfig) -> Result<RoutingPolicy, CliError> {
    let dev_path = config
        .dev
        .as_ref()
        .ok_or_else(|| CliError::Input("--dev is required for calibration".into()))?;
    let dev = load(dev_path)?;
    let rates = config.rate_fractions(&DEFAULT_CANDIDATE_RATES)?;
    calibrate(&dev, config.signal()?, &rates, config.objective).map_err(CliError::in_file(dev_path))
}

pub fn calibrate_cmd(config: &RunConfig) -> Result<(), CliError> {
    check_protocol(config)?;
    let policy = calibrate_from_dev(config)?;
    emitter(config).emit("policy", &policy.to_json()?, &report::calibration_table(&policy).render())
}

/// The policy from `--policy`, or one calibrated on `--dev`.
fn obtain_policy(config: &RunConfig) -> Result<RoutingPolicy, CliError> {
    check_protocol(config)?;
    match &config.policy {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RoutingPolicy::from_json(&text).map_err(CliError::in_file(path))
        }
        None if config.dev.is_some() => calibrate_from_dev(config),
        None => Err(CliError::Input("either --policy or --dev is required".into())),
    }
}

pub fn route(config: &RunConfig) -> Result<(), CliError> {
    let policy = obtain_policy(config)?;
    let sets = load_eval_sets(&config.eval)?;
    let mut runs = Vec::new();
    let mut table = Table::new(
        format!("Routing decisions ({}, τ = {})", policy.signal, verigate::json::format_real(policy.threshold)),
        &["Split", "N", "Triggered", "Trig.%"],
    );
    for set in &sets {
        let run = set.tag(apply_policy(&set.data, &policy))?;
        let triggered = run.decisions.iter().filter(|d| d.triggered).count();
        table.push(vec![
            set.label.clone(),
            set.data.len().to_string(),
            triggered.to_string(),
            report::pct(run.realized_rate),
        ]);
        runs.push(Labeled {
            split: &set.label,
            result: run,
        });
    }
    let echo = config.echo();
    let results = serde_json::json!({ "policy": policy, "splits": runs });
    emitter(config).emit("route", &Document::new("route", &echo, &results).to_json()?, &table.render())
}

pub fn evaluate(config: &RunConfig) -> Result<(), CliError> {
    let policy = obtain_policy(config)?;
    let sets = load_eval_sets(&config.eval)?;
    let rows = sets
        .iter()
        .map(|set| {
            let mut row = set.tag(evaluate_policy(&set.data, &policy, Metric::F1, &config.bootstrap))?;
            row.split = set.label.clone();
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let echo = config.echo();
    let results = serde_json::json!({ "policy": policy, "splits": rows });
    let text = report::evaluate_table(&rows, &policy.signal.to_string(), config.bootstrap.level).render();
    emitter(config).emit("evaluate", &Document::new("evaluate", &echo, &results).to_json()?, &text)
}

pub fn report_cmd(kind: ReportKind, config: &RunConfig) -> Result<(), CliError> {
    let sets = load_eval_sets(&config.eval)?;
    let labels: Vec<String> = sets.iter().map(|s| s.label.clone()).collect();
    let echo = config.echo();
    let name = kind.name();
    let (json, text) = match kind {
        ReportKind::Fixbreak => {
            let rows = sets
                .iter()
                .map(|s| s.tag(fix_break_table(&s.data, config.condition)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let labeled: Vec<_> = labels.iter().zip(&rows).map(|(l, r)| Labeled { split: l, result: r }).collect();
            (
                Document::new(name, &echo, &labeled).to_json()?,
                report::fixbreak_table(&rows, &labels, config.condition.as_str()).render(),
            )
        }
        ReportKind::Conditions => {
            let reports = sets.iter().map(|s| s.tag(condition_report(&s.data))).collect::<Result<Vec<_>, CliError>>()?;
            let tables: Vec<Table> = labels.iter().zip(&reports).map(|(l, r)| report::conditions_table(r, l)).collect();
            let labeled: Vec<_> = labels.iter().zip(&reports).map(|(l, r)| Labeled { split: l, result: r }).collect();
            (Document::new(name, &echo, &labeled).to_json()?, joined(&tables))
        }
        ReportKind::Oracle => {
            let rows = sets
                .iter()
                .map(|s| s.tag(oracle_ceiling(&s.data, config.condition)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let labeled: Vec<_> = labels.iter().zip(&rows).map(|(l, r)| Labeled { split: l, result: r }).collect();
            (
                Document::new(name, &echo, &labeled).to_json()?,
                report::oracle_table(&rows, &labels).render(),
            )
        }
        ReportKind::Layersweep => {
            let sweeps = sets.iter().map(|s| s.tag(layer_sweep(&s.data, config.label))).collect::<Result<Vec<_>, CliError>>()?;
            let tables: Vec<Table> = labels.iter().zip(&sweeps).map(|(l, s)| report::layersweep_table(s, l)).collect();
            let labeled: Vec<_> = labels.iter().zip(&sweeps).map(|(l, r)| Labeled { split: l, result: r }).collect();
            (Document::new(name, &echo, &labeled).to_json()?, joined(&tables))
        }
        ReportKind::Ratesweep => {
            let signal = config.signal()?;
            let rates = config.rate_fractions(&DEFAULT_SWEEP_RATES)?;
            let sweeps = sets
                .iter()
                .map(|s| s.tag(trigger_rate_sweep(&s.data, &signal, &rates)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let labeled: Vec<_> = labels.iter().zip(&sweeps).map(|(l, r)| Labeled { split: l, result: r }).collect();
            (
                Document::new(name, &echo, &labeled).to_json()?,
                report::ratesweep_table(&sweeps, &labels).render(),
            )
        }
    };
    emitter(config).emit(name, &json, &text)
}
