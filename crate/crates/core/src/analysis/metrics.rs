// SPDX-License-Identifier: Apache-2.0

//! Yes/no benchmark metrics with "yes" as the positive class.
//!
//! Unparseable answers are incorrect and are never counted as a "yes"
//! prediction. Precision and recall are 0 when their denominator is 0; F1 is
//! 0 when precision + recall is 0.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Answer, Condition, Dataset, GroundTruth};

/// F1, precision, recall, accuracy and yes-rate of one answer set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    /// Fraction of parseable answers that are "yes".
    pub yes_rate: f64,
}

/// Additive per-sample counts from which a [`MetricSet`] is derived.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub correct: u64,
    pub yes: u64,
    pub parseable: u64,
    pub total: u64,
}

impl Confusion {
    pub fn of(answer: Answer, truth: GroundTruth) -> Self {
        let predicted_yes = answer == Answer::Yes;
        Confusion {
            true_pos: u64::from(predicted_yes && truth.is_yes()),
            false_pos: u64::from(predicted_yes && !truth.is_yes()),
            false_neg: u64::from(!predicted_yes && truth.is_yes()),
            correct: u64::from(answer == truth.answer()),
            yes: u64::from(predicted_yes),
            parseable: u64::from(answer != Answer::Unparseable),
            total: 1,
        }
    }

    pub fn metrics(&self) -> MetricSet {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.true_pos, self.true_pos + self.false_pos);
        let recall = ratio(self.true_pos, self.true_pos + self.false_neg);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        MetricSet {
            f1,
            precision,
            recall,
            accuracy: ratio(self.correct, self.total),
            yes_rate: ratio(self.yes, self.parseable),
        }
    }
}

impl Add for Confusion {
    type Output = Confusion;

    fn add(mut self, rhs: Confusion) -> Confusion {
        self += rhs;
        self
    }
}

impl AddAssign for Confusion {
    fn add_assign(&mut self, rhs: Confusion) {
        self.true_pos += rhs.true_pos;
        self.false_pos += rhs.false_pos;
        self.false_neg += rhs.false_neg;
        self.correct += rhs.correct;
        self.yes += rhs.yes;
        self.parseable += rhs.parseable;
        self.total += rhs.total;
    }
}

impl std::iter::Sum for Confusion {
    fn sum<I: Iterator<Item = Confusion>>(iter: I) -> Self {
        iter.fold(Confusion::default(), Add::add)
    }
}

/// Metrics of `answers` against `truths`.
///
/// ```
/// use verigate::analysis::pope_metrics;
/// use verigate::trace::{Answer::*, GroundTruth};
///
/// let truths = [GroundTruth::Yes, GroundTruth::No, GroundTruth::No, GroundTruth::No];
/// let m = pope_metrics(&[Yes, Yes, No, No], &truths).unwrap();
/// assert_eq!((m.precision, m.recall, m.accuracy), (0.5, 1.0, 0.75));
/// ```
pub fn pope_metrics(answers: &[Answer], truths: &[GroundTruth]) -> Result<MetricSet> {
    if answers.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: answers.len(),
            right: truths.len(),
        });
    }
    if answers.is_empty() {
        return Err(Error::Empty("answer list"));
    }
    Ok(answers
        .iter()
        .zip(truths)
        .map(|(&a, &t)| Confusion::of(a, t))
        .sum::<Confusion>()
        .metrics())
}

/// A scalar metric selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    F1,
    Precision,
    Recall,
    Accuracy,
    YesRate,
}

impl Metric {
    pub fn of(self, m: &MetricSet) -> f64 {
        match self {
            Metric::F1 => m.f1,
            Metric::Precision => m.precision,
            Metric::Recall => m.recall,
            Metric::Accuracy => m.accuracy,
            Metric::YesRate => m.yes_rate,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Accuracy => "accuracy",
            Metric::YesRate => "yes_rate",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Metric::F1, Metric::Precision, Metric::Recall, Metric::Accuracy, Metric::YesRate]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid("metric", format!("'{s}'")))
    }
}

/// Calibration objective: the metrics a threshold may be tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    F1,
    Accuracy,
}

impl From<Objective> for Metric {
    fn from(o: Objective) -> Metric {
        match o {
            Objective::F1 => Metric::F1,
            Objective::Accuracy => Metric::Accuracy,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Metric::from(*self).fmt(f)
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Objective::F1),
            "accuracy" => Ok(Objective::Accuracy),
            _ => Err(Error::invalid("objective", format!("'{s}' (expected f1 or accuracy)"))),
        }
    }
}

/// Ground truth of every record, in record order.
pub fn truths(ds: &Dataset) -> Vec<GroundTruth> {
    ds.records().iter().map(|r| r.ground_truth).collect()
}

/// Normalized answers of every record under `condition`.
pub fn condition_answers(ds: &Dataset, condition: Condition) -> Result<Vec<Answer>> {
    ds.records().iter().map(|r| r.answer(condition)).collect()
}

/// Metrics of one condition over the whole dataset.
pub fn condition_metrics(ds: &Dataset, condition: Condition) -> Result<MetricSet> {
    pope_metrics(&condition_answers(ds, condition)?, &truths(ds))
}
