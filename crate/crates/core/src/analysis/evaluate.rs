// SPDX-License-Identifier: Apache-2.0

//! Baseline, always-on and routed performance of a policy on one split.

use serde::{Deserialize, Serialize};

use crate::analysis::bootstrap::{paired_bootstrap_answers, BootstrapConfig, ConfidenceInterval};
use crate::analysis::metrics::{condition_answers, pope_metrics, truths, Metric, MetricSet};
use crate::analysis::outcome::{classify_outcome, routed_answers, OutcomeCategory};
use crate::error::{Error, Result};
use crate::routing::{apply_policy, RoutingPolicy};
use crate::trace::{Condition, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub split: String,
    pub n: usize,
    pub baseline: MetricSet,
    pub always_on: MetricSet,
    pub routed: MetricSet,
    pub threshold: f64,
    pub realized_rate: f64,
    /// Fixes and breaks among routed samples.
    pub routed_fixes: usize,
    pub routed_breaks: usize,
    /// Metric the intervals are computed for.
    pub metric: Metric,
    /// `metric(routed) - metric(baseline)`.
    pub routed_vs_baseline: ConfidenceInterval,
    /// `metric(always-on) - metric(baseline)`.
    pub always_on_vs_baseline: ConfidenceInterval,
}

/// Applies `policy` to `ds` and compares it with the two fixed strategies.
pub fn evaluate_policy(
    ds: &Dataset,
    policy: &RoutingPolicy,
    metric: Metric,
    bootstrap: &BootstrapConfig,
) -> Result<EvalRow> {
    if ds.is_empty() {
        return Err(Error::NoRecords);
    }
    let truths = truths(ds);
    let base = condition_answers(ds, Condition::Baseline)?;
    let verif = condition_answers(ds, Condition::Verification)?;
    let run = apply_policy(ds, policy)?;
    let mask = run.mask();
    let routed = routed_answers(ds, Condition::Verification, &mask)?;

    let (mut routed_fixes, mut routed_breaks) = (0, 0);
    for (r, _) in ds.records().iter().zip(&mask).filter(|(_, &t)| t) {
        match classify_outcome(r.is_correct(Condition::Baseline)?, r.is_correct(Condition::Verification)?) {
            OutcomeCategory::Fix => routed_fixes += 1,
            OutcomeCategory::Break => routed_breaks += 1,
            _ => {}
        }
    }

    Ok(EvalRow {
        split: ds.split_names().join("+"),
        n: ds.len(),
        baseline: pope_metrics(&base, &truths)?,
        always_on: pope_metrics(&verif, &truths)?,
        routed: pope_metrics(&routed, &truths)?,
        threshold: run.threshold,
        realized_rate: run.realized_rate,
        routed_fixes,
        routed_breaks,
        metric,
        routed_vs_baseline: paired_bootstrap_answers(&truths, &base, &routed, metric, bootstrap)?,
        always_on_vs_baseline: paired_bootstrap_answers(&truths, &base, &verif, metric, bootstrap)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::calibrate;
    use crate::signals::SignalSpec;
    use crate::testutil::dataset_with_signal;

    fn data() -> Dataset {
        // high-signal samples are fixed by verification; low-signal ones broken
        let rows: Vec<(&str, &str, &str, f64)> = (0..100)
            .map(|i| {
                let u = i as f64 / 200.0;
                match i {
                    90.. => ("yes", "no", "yes", u),
                    0..=19 => ("yes", "yes", "no", u),
                    _ if i % 2 == 0 => ("yes", "yes", "yes", u),
                    _ => ("no", "no", "no", u),
                }
            })
            .collect();
        dataset_with_signal(&rows)
    }

    #[test]
    fn routed_beats_both_fixed_strategies() {
        let ds = data();
        let policy = calibrate(&ds, SignalSpec::inverse_top1(), &[0.1], Default::default()).unwrap();
        let cfg = BootstrapConfig {
            n_resamples: 200,
            ..Default::default()
        };
        let row = evaluate_policy(&ds, &policy, Metric::F1, &cfg).unwrap();
        assert_eq!((row.routed_fixes, row.routed_breaks), (10, 0));
        assert_eq!(row.realized_rate, 0.1);
        assert!(row.routed.f1 > row.baseline.f1);
        assert!(row.always_on.f1 < row.baseline.f1);
        assert!(row.routed_vs_baseline.point > 0.0);
    }

    #[test]
    fn never_triggering_policy_matches_baseline() {
        let ds = data();
        let mut policy = calibrate(&ds, SignalSpec::inverse_top1(), &[0.1], Default::default()).unwrap();
        policy.threshold = 1.0;
        let row = evaluate_policy(&ds, &policy, Metric::F1, &BootstrapConfig { n_resamples: 50, ..Default::default() }).unwrap();
        assert_eq!(row.routed, row.baseline);
        assert_eq!(row.routed_vs_baseline.point, 0.0);
        assert_eq!((row.routed_vs_baseline.lo, row.routed_vs_baseline.hi), (0.0, 0.0));
    }
}
