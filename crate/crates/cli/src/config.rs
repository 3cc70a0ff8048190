// SPDX-License-Identifier: Apache-2.0

//! Effective run configuration: flags over config file over defaults.

use std::path::{Path, PathBuf};

use serde::Serialize;
use verigate::analysis::{BootstrapConfig, Objective, SweepLabel};
use verigate::signals::SignalSpec;
use verigate::synth::SynthConfig;
use verigate::Condition;

use crate::args::{FileConfig, Format, RunArgs, SynthArgs};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub dev: Option<PathBuf>,
    pub eval: Vec<PathBuf>,
    pub policy: Option<PathBuf>,
    pub signal: Option<SignalSpec>,
    pub condition: Condition,
    /// Percentages, as given.
    pub rates: Option<Vec<f64>>,
    pub objective: Objective,
    pub label: SweepLabel,
    pub bootstrap: BootstrapConfig,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parsed<T: std::str::FromStr<Err = verigate::Error>>(value: Option<String>) -> Result<Option<T>, CliError> {
    value.map(|v| v.parse::<T>()).transpose().map_err(CliError::from)
}

impl RunConfig {
    pub fn resolve(args: RunArgs) -> Result<Self, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => read_json(path)?,
            None => FileConfig::default(),
        };
        let defaults = BootstrapConfig::default();
        let config = RunConfig {
            dev: args.dev.or(file.dev),
            eval: if args.eval.is_empty() { file.eval } else { args.eval },
            policy: args.policy.or(file.policy),
            signal: parsed(args.signal.or(file.signal))?,
            condition: parsed(args.condition.or(file.condition))?.unwrap_or(Condition::Verification),
            rates: args.rates.or(file.rates),
            objective: parsed(args.objective.or(file.objective))?.unwrap_or_default(),
            label: parsed(args.label.or(file.label))?.unwrap_or_default(),
            bootstrap: BootstrapConfig {
                n_resamples: args.bootstrap_n.or(file.bootstrap_n).unwrap_or(defaults.n_resamples),
                level: args.level.or(file.level).unwrap_or(defaults.level),
                seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
            },
            out: args.out.or(file.out),
            format: args.format.or(file.format).unwrap_or_default(),
        };
        if config.condition == Condition::Baseline {
            return Err(CliError::Input("--condition must name a prompted condition, not baseline".into()));
        }
        Ok(config)
    }

    pub fn signal(&self) -> Result<SignalSpec, CliError> {
        self.signal
            .ok_or_else(|| CliError::Input("--signal is required (entropy:LAYER or inv-top1)".into()))
    }

    /// Rates as fractions, or `default` when none were given.
    pub fn rate_fractions(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match &self.rates {
            None => Ok(default.to_vec()),
            Some(r) if r.is_empty() => Err(CliError::Input("--rates is empty".into())),
            Some(r) => Ok(r.iter().map(|p| p / 100.0).collect()),
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// True when both paths name the same file.
pub fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

pub fn resolve_synth(args: &SynthArgs) -> Result<SynthConfig, CliError> {
    let mut c: SynthConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => SynthConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field.clone() { c.$field = v; })*
        };
    }
    set!(
        seed,
        n_samples,
        n_layers,
        n_positions,
        split,
        fix_fraction,
        break_fraction,
        unchanged_wrong_fraction,
        yes_rate_base,
        signal_layer,
        signal_separation,
        confidence_separation,
        verification_entropy_scale,
        neutral_entropy_scale
    );
    if args.no_traces {
        c.include_traces = false;
    }
    if args.no_neutral {
        c.include_neutral = false;
    }
    Ok(c)
}
