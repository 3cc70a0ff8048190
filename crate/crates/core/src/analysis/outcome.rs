// SPDX-License-Identifier: Apache-2.0

//! Per-sample effect of a prompt relative to baseline.

use serde::{Deserialize, Serialize};

use crate::analysis::metrics::{condition_metrics, pope_metrics, truths};
use crate::error::Result;
use crate::trace::{Answer, Condition, Dataset};

/// How a prompted answer's correctness relates to the baseline answer's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeCategory {
    /// Baseline wrong, prompted correct.
    Fix,
    /// Baseline correct, prompted wrong.
    Break,
    UnchangedCorrect,
    UnchangedWrong,
}

pub fn classify_outcome(base_correct: bool, prompted_correct: bool) -> OutcomeCategory {
    match (base_correct, prompted_correct) {
        (false, true) => OutcomeCategory::Fix,
        (true, false) => OutcomeCategory::Break,
        (true, true) => OutcomeCategory::UnchangedCorrect,
        (false, false) => OutcomeCategory::UnchangedWrong,
    }
}

/// Fix/break decomposition of one prompted condition against baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixBreakReport {
    pub n: usize,
    pub fixes: usize,
    pub breaks: usize,
    pub unchanged_correct: usize,
    pub unchanged_wrong: usize,
    /// `fixes - breaks`.
    pub net: i64,
    /// Prompted yes-rate minus baseline yes-rate, in percentage points.
    pub delta_yes_pct: f64,
    /// Prompted F1 minus baseline F1.
    pub delta_f1: f64,
}

pub fn fix_break_table(ds: &Dataset, prompted: Condition) -> Result<FixBreakReport> {
    let mut counts = [0usize; 4];
    for r in ds.records() {
        let category = classify_outcome(r.is_correct(Condition::Baseline)?, r.is_correct(prompted)?);
        counts[category as usize] += 1;
    }
    let [fixes, breaks, unchanged_correct, unchanged_wrong] = counts;
    let base = condition_metrics(ds, Condition::Baseline)?;
    let prompted_metrics = condition_metrics(ds, prompted)?;
    Ok(FixBreakReport {
        n: ds.len(),
        fixes,
        breaks,
        unchanged_correct,
        unchanged_wrong,
        net: fixes as i64 - breaks as i64,
        delta_yes_pct: 100.0 * (prompted_metrics.yes_rate - base.yes_rate),
        delta_f1: prompted_metrics.f1 - base.f1,
    })
}

/// Answers after routing: the prompted answer where `triggered`, else baseline.
pub fn routed_answers(ds: &Dataset, prompted: Condition, triggered: &[bool]) -> Result<Vec<Answer>> {
    debug_assert_eq!(triggered.len(), ds.len());
    ds.records()
        .iter()
        .zip(triggered)
        .map(|(r, &t)| r.answer(if t { prompted } else { Condition::Baseline }))
        .collect()
}

/// Metrics after routing with the given trigger mask.
pub fn routed_metrics(
    ds: &Dataset,
    prompted: Condition,
    triggered: &[bool],
) -> Result<crate::analysis::metrics::MetricSet> {
    pope_metrics(&routed_answers(ds, prompted, triggered)?, &truths(ds))
}
