// SPDX-License-Identifier: Apache-2.0

//! Paired bootstrap over records.
//!
//! Each resample draws record indices with replacement and recomputes
//! `metric(b) - metric(a)` on the same draw. Resample `k` uses random stream
//! `(seed, k)`, so the result does not depend on evaluation order. The
//! interval is the percentile interval at the requested level.

use serde::{Deserialize, Serialize};

use crate::analysis::metrics::{condition_answers, truths, Confusion, Metric};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::stats::{quantile_sorted, sorted_copy};
use crate::trace::{Answer, Condition, Dataset, GroundTruth};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_resamples: 2000,
            level: 0.95,
            seed: 0,
        }
    }
}

/// Bootstrap interval for a paired metric difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    /// Difference on the full sample.
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub n_resamples: usize,
    pub level: f64,
    /// Two-sided: twice the fraction of resamples on the far side of zero,
    /// floored at `1 / n_resamples` and capped at 1.
    pub p_value: f64,
}

impl ConfidenceInterval {
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

/// Paired bootstrap of `metric(answers_b) - metric(answers_a)`.
pub fn paired_bootstrap_answers(
    truths: &[GroundTruth],
    answers_a: &[Answer],
    answers_b: &[Answer],
    metric: Metric,
    config: &BootstrapConfig,
) -> Result<ConfidenceInterval> {
    let n = truths.len();
    if answers_a.len() != n || answers_b.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: if answers_a.len() != n { answers_a.len() } else { answers_b.len() },
        });
    }
    if n == 0 {
        return Err(Error::Empty("sample"));
    }
    if config.n_resamples == 0 {
        return Err(Error::invalid("n_resamples", "must be at least 1"));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::invalid("level", format!("{} outside (0, 1)", config.level)));
    }

    let per_a: Vec<Confusion> = answers_a.iter().zip(truths).map(|(&a, &t)| Confusion::of(a, t)).collect();
    let per_b: Vec<Confusion> = answers_b.iter().zip(truths).map(|(&a, &t)| Confusion::of(a, t)).collect();
    let delta = |a: Confusion, b: Confusion| metric.of(&b.metrics()) - metric.of(&a.metrics());

    let point = delta(per_a.iter().copied().sum(), per_b.iter().copied().sum());

    let draws: Vec<f64> = (0..config.n_resamples)
        .map(|k| {
            let mut stream = Stream::new(config.seed, k as u64);
            let (mut a, mut b) = (Confusion::default(), Confusion::default());
            for _ in 0..n {
                let i = stream.index(n);
                a += per_a[i];
                b += per_b[i];
            }
            delta(a, b)
        })
        .collect();

    let sorted = sorted_copy(&draws);
    let alpha = 1.0 - config.level;
    // the percentile interval can miss a skewed point estimate; widen to cover it
    let lo = quantile_sorted(&sorted, alpha / 2.0).min(point);
    let hi = quantile_sorted(&sorted, 1.0 - alpha / 2.0).max(point);

    let far_side = if point > 0.0 {
        draws.iter().filter(|&&d| d <= 0.0).count()
    } else if point < 0.0 {
        draws.iter().filter(|&&d| d >= 0.0).count()
    } else {
        config.n_resamples
    };
    let n_resamples = config.n_resamples as f64;
    let p_value = (2.0 * far_side as f64 / n_resamples).max(1.0 / n_resamples).min(1.0);

    Ok(ConfidenceInterval {
        point,
        lo,
        hi,
        n_resamples: config.n_resamples,
        level: config.level,
        p_value,
    })
}

/// Paired bootstrap of `metric(condition_b) - metric(condition_a)`.
pub fn paired_bootstrap(
    ds: &Dataset,
    metric: Metric,
    condition_a: Condition,
    condition_b: Condition,
    config: &BootstrapConfig,
) -> Result<ConfidenceInterval> {
    paired_bootstrap_answers(
        &truths(ds),
        &condition_answers(ds, condition_a)?,
        &condition_answers(ds, condition_b)?,
        metric,
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::dataset_from_answers;

    fn small() -> Dataset {
        let mut rows = Vec::new();
        for i in 0..60 {
            let truth = if i % 2 == 0 { "yes" } else { "no" };
            let wrong = if i % 2 == 0 { "no" } else { "yes" };
            let base = if i % 3 == 0 { wrong } else { truth };
            let verif = if i % 5 == 0 { wrong } else { truth };
            rows.push((truth, base, verif));
        }
        dataset_from_answers(&rows)
    }

    #[test]
    fn identical_conditions_give_zero_interval() {
        let ds = small();
        let cfg = BootstrapConfig {
            n_resamples: 300,
            ..Default::default()
        };
        let ci = paired_bootstrap(&ds, Metric::F1, Condition::Baseline, Condition::Baseline, &cfg).unwrap();
        assert_eq!((ci.point, ci.lo, ci.hi), (0.0, 0.0, 0.0));
        assert_eq!(ci.p_value, 1.0);
    }

    #[test]
    fn same_seed_same_interval() {
        let ds = small();
        let cfg = BootstrapConfig {
            n_resamples: 500,
            level: 0.9,
            seed: 42,
        };
        let a = paired_bootstrap(&ds, Metric::Accuracy, Condition::Baseline, Condition::Verification, &cfg).unwrap();
        let b = paired_bootstrap(&ds, Metric::Accuracy, Condition::Baseline, Condition::Verification, &cfg).unwrap();
        assert_eq!(a.lo.to_bits(), b.lo.to_bits());
        assert_eq!(a.hi.to_bits(), b.hi.to_bits());
        assert!(a.lo <= a.point && a.point <= a.hi);
        let other = paired_bootstrap(
            &ds,
            Metric::Accuracy,
            Condition::Baseline,
            Condition::Verification,
            &BootstrapConfig { seed: 43, ..cfg },
        )
        .unwrap();
        assert_eq!(other.point, a.point);
    }

    #[test]
    fn rejects_bad_config() {
        let ds = small();
        let zero = BootstrapConfig {
            n_resamples: 0,
            ..Default::default()
        };
        assert!(paired_bootstrap(&ds, Metric::F1, Condition::Baseline, Condition::Verification, &zero).is_err());
        let level = BootstrapConfig {
            level: 1.0,
            ..Default::default()
        };
        assert!(paired_bootstrap(&ds, Metric::F1, Condition::Baseline, Condition::Verification, &level).is_err());
        assert!(paired_bootstrap(&ds, Metric::F1, Condition::Baseline, Condition::Neutral, &Default::default()).is_err());
    }
}
