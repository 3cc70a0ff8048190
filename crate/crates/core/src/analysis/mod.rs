// SPDX-License-Identifier: Apache-2.0

//! Evaluation mathematics over a [`Dataset`](crate::trace::Dataset).

pub mod auroc;
pub mod bootstrap;
pub mod evaluate;
pub mod layers;
pub mod metrics;
pub mod oracle;
pub mod outcome;
pub mod sweep;

pub use auroc::auroc;
pub use bootstrap::{paired_bootstrap, paired_bootstrap_answers, BootstrapConfig, ConfidenceInterval};
pub use evaluate::{evaluate_policy, EvalRow};
pub use layers::{condition_report, layer_sweep, ConditionReport, ConditionRow, LayerAuroc, LayerSweep, SweepLabel};
pub use metrics::{condition_metrics, pope_metrics, Confusion, Metric, MetricSet, Objective};
pub use oracle::{oracle_ceiling, OracleCeiling};
pub use outcome::{classify_outcome, fix_break_table, routed_answers, routed_metrics, FixBreakReport, OutcomeCategory};
pub use sweep::{trigger_rate_sweep, RateRow, RateSweep, DEFAULT_SWEEP_RATES};
