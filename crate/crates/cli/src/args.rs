// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "verigate",
    version,
    about = "Route yes/no questions to a verification prompt from pre-generation uncertainty, and analyse the traces",
    after_help = "Exit status: 0 success, 1 analysis failure, 2 invalid input, 3 protocol violation (dev file reused for evaluation)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dataset files against the trace/record schema.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Write a synthetic dataset with planted ground truth.
    Synth(SynthArgs),
    /// Choose a trigger threshold on a development file and write policy.json.
    Calibrate(RunArgs),
    /// Apply a policy and write per-sample routing decisions.
    Route(RunArgs),
    /// Baseline, always-on and routed metrics with bootstrap intervals, per split.
    Evaluate(RunArgs),
    /// Emit one analysis table.
    Report {
        #[arg(value_enum)]
        kind: ReportKind,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    /// Fix/break decomposition of the prompted condition.
    Fixbreak,
    /// Entropy and mass changes under verification and neutral prompts.
    Conditions,
    /// Oracle routing ceiling.
    Oracle,
    /// Per-layer AUROC of baseline attention entropy.
    Layersweep,
    /// Routed F1 across trigger rates.
    Ratesweep,
}

impl ReportKind {
    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Fixbreak => "fixbreak",
            ReportKind::Conditions => "conditions",
            ReportKind::Oracle => "oracle",
            ReportKind::Layersweep => "layersweep",
            ReportKind::Ratesweep => "ratesweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Text
    }

    pub fn text(self) -> bool {
        self != Format::Json
    }
}

/// Flags shared by the analysis commands. Every flag overrides the matching
/// key of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file with defaults for any of these flags (keys use underscores).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Development file used for calibration.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Evaluation file; repeat for several.
    #[arg(long)]
    pub eval: Vec<PathBuf>,
    /// Routing policy written by `calibrate`.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Signal: entropy:LAYER or inv-top1, optionally suffixed @CONDITION.
    #[arg(long)]
    pub signal: Option<String>,
    /// Prompted condition compared against baseline [default: verification].
    #[arg(long)]
    pub condition: Option<String>,
    /// Trigger rates in percent, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
    /// Calibration objective: f1 or accuracy [default: f1].
    #[arg(long)]
    pub objective: Option<String>,
    /// Layer-sweep label: answer_changed or baseline_wrong [default: answer_changed].
    #[arg(long)]
    pub label: Option<String>,
    /// Bootstrap resamples [default: 2000].
    #[arg(long)]
    pub bootstrap_n: Option<usize>,
    /// Confidence level [default: 0.95].
    #[arg(long)]
    pub level: Option<f64>,
    /// Bootstrap seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: both].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dev: Option<PathBuf>,
    #[serde(default)]
    pub eval: Vec<PathBuf>,
    pub policy: Option<PathBuf>,
    pub signal: Option<String>,
    pub condition: Option<String>,
    pub rates: Option<Vec<f64>>,
    pub objective: Option<String>,
    pub label: Option<String>,
    pub bootstrap_n: Option<usize>,
    pub level: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    /// Output dataset file.
    pub output: PathBuf,
    /// JSON generator config; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub n_layers: Option<usize>,
    #[arg(long)]
    pub n_positions: Option<usize>,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub fix_fraction: Option<f64>,
    #[arg(long)]
    pub break_fraction: Option<f64>,
    #[arg(long)]
    pub unchanged_wrong_fraction: Option<f64>,
    #[arg(long)]
    pub yes_rate_base: Option<f64>,
    #[arg(long)]
    pub signal_layer: Option<usize>,
    /// Planted latent gap between changed and unchanged samples.
    #[arg(long)]
    pub signal_separation: Option<f64>,
    /// Planted latent gap of inverse top-1 confidence for baseline-wrong samples.
    #[arg(long)]
    pub confidence_separation: Option<f64>,
    /// Verification / baseline entropy ratio, one value or one per layer.
    #[arg(long, value_delimiter = ',')]
    pub verification_entropy_scale: Option<Vec<f64>>,
    /// Neutral / baseline entropy ratio, one value or one per layer.
    #[arg(long, value_delimiter = ',')]
    pub neutral_entropy_scale: Option<Vec<f64>>,
    /// Records only, no attention traces.
    #[arg(long)]
    pub no_traces: bool,
    /// Omit the neutral condition.
    #[arg(long)]
    pub no_neutral: bool,
}
