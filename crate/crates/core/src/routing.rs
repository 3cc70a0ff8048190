// SPDX-License-Identifier: Apache-2.0

//! Selective triggering of the verification prompt.
//!
//! A sample is routed to the verification prompt iff its uncertainty signal
//! strictly exceeds the threshold `τ`; ties never trigger. `τ` is calibrated on
//! a development set by sweeping candidate trigger rates, turning each rate
//! into a threshold through the empirical `(1 - rate)` quantile of the dev
//! signals, and keeping the rate whose routed answers score best.

use serde::{Deserialize, Serialize};

use crate::analysis::metrics::{Metric, Objective};
use crate::analysis::outcome::routed_metrics;
use crate::error::{Error, Result};
use crate::json;
use crate::signals::{signal_values, SignalSpec};
use crate::stats::{quantile_sorted, sorted_copy};
use crate::trace::{Condition, Dataset};

/// Default sweep grid, as fractions.
pub const DEFAULT_CANDIDATE_RATES: [f64; 12] = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.10, 0.15, 0.20, 0.50];

/// `true` iff `u > tau`.
pub fn route(u: f64, tau: f64) -> Result<bool> {
    if !u.is_finite() || !tau.is_finite() {
        return Err(Error::invalid("routing input", format!("u = {u}, tau = {tau}")));
    }
    Ok(u > tau)
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("trigger rate", format!("{rate} outside (0, 1]")))
    }
}

/// Threshold at which about a fraction `rate` of `signals` trigger.
///
/// Returns the `(1 - rate)` quantile of the signals, interpolating linearly
/// between order statistics. Because routing is strict, samples tied at the
/// threshold do not trigger, so ties can only lower the realized rate.
///
/// ```
/// use verigate::routing::{route, threshold_for_trigger_rate};
/// let signals: Vec<f64> = (1..=10).map(f64::from).collect();
/// let tau = threshold_for_trigger_rate(&signals, 0.2).unwrap();
/// let fired: Vec<f64> = signals.iter().copied().filter(|&u| route(u, tau).unwrap()).collect();
/// assert_eq!(fired, [9.0, 10.0]);
/// ```
pub fn threshold_for_trigger_rate(signals: &[f64], rate: f64) -> Result<f64> {
    if signals.is_empty() {
        return Err(Error::Empty("signal list"));
    }
    check_rate(rate)?;
    if let Some(u) = signals.iter().find(|u| !u.is_finite()) {
        return Err(Error::invalid("signal", format!("{u}")));
    }
    Ok(quantile_sorted(&sorted_copy(signals), 1.0 - rate))
}

/// Trigger decision for each signal.
pub fn trigger_mask(signals: &[f64], tau: f64) -> Vec<bool> {
    signals.iter().map(|&u| u > tau).collect()
}

fn fraction(mask: &[bool]) -> f64 {
    mask.iter().filter(|&&t| t).count() as f64 / mask.len() as f64
}

/// Dev-set score of one candidate trigger rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub rate: f64,
    pub threshold: f64,
    pub realized_rate: f64,
    pub objective: f64,
}

/// Where a policy's threshold came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Split label(s) of the development set.
    pub dev_split: String,
    pub candidate_rates: Vec<f64>,
    pub objective: Objective,
    pub selected_rate: f64,
    pub achieved_objective: f64,
    pub candidates: Vec<CandidateResult>,
}

/// A signal and threshold; fully determines routing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingPolicy {
    pub signal: SignalSpec,
    pub threshold: f64,
    pub calibration: Calibration,
}

impl RoutingPolicy {
    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() {
            return Err(Error::invalid("policy threshold", format!("{}", self.threshold)));
        }
        self.calibration.candidate_rates.iter().try_for_each(|&r| check_rate(r))
    }

    pub fn to_json(&self) -> Result<String> {
        json::to_document(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let policy: RoutingPolicy = serde_json::from_str(text)?;
        policy.validate()?;
        Ok(policy)
    }
}

fn require_condition(ds: &Dataset, condition: Condition) -> Result<()> {
    ds.records().iter().try_for_each(|r| r.outcome(condition).map(drop))
}

/// Picks the candidate rate whose routed dev answers maximize `objective`.
///
/// Routed samples take their verification answer, the rest their baseline
/// answer. Ties go to the lowest rate, then the lowest threshold.
pub fn calibrate(
    dev: &Dataset,
    signal: SignalSpec,
    candidate_rates: &[f64],
    objective: Objective,
) -> Result<RoutingPolicy> {
    if candidate_rates.is_empty() {
        return Err(Error::Empty("candidate rate list"));
    }
    candidate_rates.iter().try_for_each(|&r| check_rate(r))?;
    require_condition(dev, Condition::Verification)?;
    let signals = signal_values(dev, &signal)?;
    let metric = Metric::from(objective);

    let candidates = candidate_rates
        .iter()
        .map(|&rate| {
            let threshold = threshold_for_trigger_rate(&signals, rate)?;
            let mask = trigger_mask(&signals, threshold);
            let metrics = routed_metrics(dev, Condition::Verification, &mask)?;
            Ok(CandidateResult {
                rate,
                threshold,
                realized_rate: fraction(&mask),
                objective: metric.of(&metrics),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = candidates
        .iter()
        .copied()
        .reduce(|best, c| {
            let better = c.objective > best.objective
                || (c.objective == best.objective
                    && (c.rate < best.rate || (c.rate == best.rate && c.threshold < best.threshold)));
            if better {
                c
            } else {
                best
            }
        })
        .expect("candidate list is nonempty");

    Ok(RoutingPolicy {
        signal,
        threshold: best.threshold,
        calibration: Calibration {
            dev_split: dev.split_names().join("+"),
            candidate_rates: candidate_rates.to_vec(),
            objective,
            selected_rate: best.rate,
            achieved_objective: best.objective,
            candidates,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub sample_id: String,
    pub u: f64,
    pub triggered: bool,
}

/// Decisions for every record plus the realized trigger rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingRun {
    pub threshold: f64,
    pub realized_rate: f64,
    pub decisions: Vec<RoutingDecision>,
}

impl RoutingRun {
    pub fn mask(&self) -> Vec<bool> {
        self.decisions.iter().map(|d| d.triggered).collect()
    }
}

pub fn apply_policy(ds: &Dataset, policy: &RoutingPolicy) -> Result<RoutingRun> {
    policy.validate()?;
    let signals = signal_values(ds, &policy.signal)?;
    let decisions: Vec<RoutingDecision> = ds
        .records()
        .iter()
        .zip(&signals)
        .map(|(r, &u)| {
            Ok(RoutingDecision {
                sample_id: r.sample_id.clone(),
                u,
                triggered: route(u, policy.threshold)?,
            })
        })
        .collect::<Result<_>>()?;
    let realized_rate = decisions.iter().filter(|d| d.triggered).count() as f64 / decisions.len() as f64;
    Ok(RoutingRun {
        threshold: policy.threshold,
        realized_rate,
        decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::dataset_with_signal;
    use proptest::prelude::*;

    /// Brute-force reference: among all cut points between distinct sorted
    /// values (plus "nothing" and "everything"), the triggered counts that
    /// come closest to `rate * n`.
    fn best_counts(signals: &[f64], rate: f64) -> Vec<usize> {
        let mut sorted = signals.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let n = signals.len();
        let mut counts: Vec<usize> = vec![0];
        for &v in &sorted {
            counts.push(signals.iter().filter(|&&u| u > v).count());
        }
        counts.push(n);
        let target = rate * n as f64;
        let best = counts
            .iter()
            .map(|&c| (c as f64 - target).abs())
            .fold(f64::INFINITY, f64::min);
        counts.into_iter().filter(|&c| ((c as f64 - target).abs() - best).abs() < 1e-9).collect()
    }

    #[test]
    fn route_examples() {
        assert!(route(0.2, 0.15).unwrap());
        assert!(!route(0.15, 0.15).unwrap());
        assert!(!route(-1.0, 0.0).unwrap());
        assert!(route(f64::NAN, 0.0).is_err());
        assert!(route(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn threshold_examples() {
        let s: Vec<f64> = (1..=10).map(f64::from).collect();
        let tau = threshold_for_trigger_rate(&s, 0.2).unwrap();
        assert_eq!(trigger_mask(&s, tau).iter().filter(|&&t| t).count(), 2);
        assert_eq!(best_counts(&s, 0.2), vec![2]);
        assert!(!trigger_mask(&s, tau)[7] && trigger_mask(&s, tau)[8]);

        let same = vec![0.7; 9];
        for q in [0.1, 0.5, 1.0] {
            let tau = threshold_for_trigger_rate(&same, q).unwrap();
            assert!(trigger_mask(&same, tau).iter().all(|&t| !t));
        }

        let tau = threshold_for_trigger_rate(&s, 1.0).unwrap();
        let mask = trigger_mask(&s, tau);
        assert!(!mask[0] && mask[1..].iter().all(|&t| t));
        assert!(best_counts(&s, 1.0).contains(&10));
        assert!((mask.iter().filter(|&&t| t).count() as i64 - 10).abs() <= 1);
    }

    #[test]
    fn threshold_errors() {
        assert!(threshold_for_trigger_rate(&[], 0.1).is_err());
        assert!(threshold_for_trigger_rate(&[1.0], 0.0).is_err());
        assert!(threshold_for_trigger_rate(&[1.0], 1.5).is_err());
    }

    // 100 samples with distinct signals 1..=100. Baseline is wrong on the
    // top decile and verification fixes exactly those; verification breaks
    // samples ranked 11..20.
    fn top_decile_dev() -> Dataset {
        let rows: Vec<(&str, &str, &str, f64)> = (1..=100)
            .map(|rank| {
                let u = (101 - rank) as f64 / 200.0;
                match rank {
                    1..=10 => ("yes", "no", "yes", u),
                    11..=20 => ("yes", "yes", "no", u),
                    _ => ("no", "no", "no", u),
                }
            })
            .collect();
        dataset_with_signal(&rows)
    }

    #[test]
    fn calibrate_selects_dominant_rate() {
        let dev = top_decile_dev();
        let policy = calibrate(&dev, SignalSpec::inverse_top1(), &[0.05, 0.10, 0.20], Objective::F1).unwrap();
        // hand count: 5% -> 5 fixes; 10% -> 10 fixes; 20% -> 10 fixes, 10 breaks
        assert_eq!(policy.calibration.selected_rate, 0.10);
        let objectives: Vec<f64> = policy.calibration.candidates.iter().map(|c| c.objective).collect();
        assert!(objectives[1] > objectives[0] && objectives[1] > objectives[2]);
        let run = apply_policy(&dev, &policy).unwrap();
        assert_eq!(run.realized_rate, 0.10);
    }

    #[test]
    fn calibrate_ties_go_to_lowest_rate() {
        let rows: Vec<(&str, &str, &str, f64)> =
            (0..50).map(|i| ("yes", if i % 3 == 0 { "no" } else { "yes" }, if i % 3 == 0 { "no" } else { "yes" }, i as f64 / 100.0)).collect();
        let dev = dataset_with_signal(&rows);
        let policy = calibrate(&dev, SignalSpec::inverse_top1(), &[0.2, 0.05, 0.5], Objective::Accuracy).unwrap();
        assert_eq!(policy.calibration.selected_rate, 0.05);
    }

    #[test]
    fn calibrate_single_rate_realizes_near_target() {
        let rows: Vec<(&str, &str, &str, f64)> =
            (0..200).map(|i| ("yes", "yes", "no", ((i * 37) % 200) as f64 / 400.0)).collect();
        let dev = dataset_with_signal(&rows);
        let policy = calibrate(&dev, SignalSpec::inverse_top1(), &[0.06], Objective::F1).unwrap();
        let realized = policy.calibration.candidates[0].realized_rate * 200.0;
        assert!((realized - 12.0).abs() <= 1.0, "{realized}");
    }

    #[test]
    fn calibrate_errors() {
        let dev = top_decile_dev();
        assert!(calibrate(&dev, SignalSpec::inverse_top1(), &[], Objective::F1).is_err());
        assert!(calibrate(&dev, SignalSpec::entropy(3), &[0.1], Objective::F1).is_err());
    }

    #[test]
    fn apply_policy_extremes() {
        let dev = top_decile_dev();
        let mut policy = calibrate(&dev, SignalSpec::inverse_top1(), &[0.1], Objective::F1).unwrap();
        policy.threshold = 10.0;
        assert_eq!(apply_policy(&dev, &policy).unwrap().realized_rate, 0.0);
        policy.threshold = -10.0;
        assert_eq!(apply_policy(&dev, &policy).unwrap().realized_rate, 1.0);
        policy.threshold = f64::INFINITY;
        assert!(apply_policy(&dev, &policy).is_err());
    }

    #[test]
    fn policy_json_round_trip() {
        let dev = top_decile_dev();
        let policy = calibrate(&dev, SignalSpec::inverse_top1(), &DEFAULT_CANDIDATE_RATES, Objective::F1).unwrap();
        let back = RoutingPolicy::from_json(&policy.to_json().unwrap()).unwrap();
        assert_eq!(back, policy);
    }

    proptest! {
        #[test]
        fn realized_rate_tracks_target(signals in prop::collection::vec(-50i32..50, 1..200), q in 0.01f64..=1.0) {
            let signals: Vec<f64> = signals.into_iter().map(f64::from).collect();
            let tau = threshold_for_trigger_rate(&signals, q).unwrap();
            let fired = trigger_mask(&signals, tau).iter().filter(|&&t| t).count() as f64;
            // ties may pull the rate down, never push it more than one sample above q
            prop_assert!(fired <= q * signals.len() as f64 + 1.0);
        }

        #[test]
        fn distinct_signals_land_within_one_sample(n in 1usize..300, q in 0.01f64..=1.0, seed in 0u64..1000) {
            let mut signals: Vec<f64> = (0..n).map(|i| i as f64).collect();
            crate::rng::Stream::new(seed, 0).shuffle(&mut signals);
            let tau = threshold_for_trigger_rate(&signals, q).unwrap();
            let fired = trigger_mask(&signals, tau).iter().filter(|&&t| t).count() as f64;
            prop_assert!((fired - q * n as f64).abs() <= 1.0);
        }

        #[test]
        fn raising_tau_shrinks_the_triggered_set(signals in prop::collection::vec(-5.0f64..5.0, 1..100), a in -6.0f64..6.0, b in -6.0f64..6.0) {
            let (lo, hi) = (a.min(b), a.max(b));
            let low = trigger_mask(&signals, lo);
            let high = trigger_mask(&signals, hi);
            prop_assert!(high.iter().zip(&low).all(|(&h, &l)| !h || l));
        }

        #[test]
        fn exp_transform_preserves_decisions(signals in prop::collection::vec(-5.0f64..5.0, 1..100), tau in -5.0f64..5.0) {
            let exp: Vec<f64> = signals.iter().map(|u| u.exp()).collect();
            prop_assert_eq!(trigger_mask(&signals, tau), trigger_mask(&exp, tau.exp()));
        }
    }
}
