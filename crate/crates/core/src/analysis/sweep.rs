// SPDX-License-Identifier: Apache-2.0

//! Sensitivity of routed performance to the trigger rate.

use serde::{Deserialize, Serialize};

use crate::analysis::metrics::{condition_metrics, MetricSet};
use crate::analysis::outcome::routed_metrics;
use crate::error::{Error, Result};
use crate::routing::{threshold_for_trigger_rate, trigger_mask};
use crate::signals::{signal_values, SignalSpec};
use crate::trace::{Condition, Dataset};

/// Intermediate rates of the default sweep; the 0% and 100% endpoints are
/// always added.
pub const DEFAULT_SWEEP_RATES: [f64; 7] = [0.03, 0.05, 0.07, 0.10, 0.15, 0.20, 0.50];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    /// Requested trigger rate as a fraction.
    pub rate: f64,
    /// Absent on the endpoint rows, which are not threshold-derived.
    pub threshold: Option<f64>,
    pub realized_rate: f64,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweep {
    pub signal: SignalSpec,
    pub n: usize,
    pub rows: Vec<RateRow>,
}

/// Routed metrics at each rate, with thresholds derived on `ds` itself.
///
/// The first row is the baseline (0%) and the last is always-on verification
/// (100%); both are computed directly from the conditions. Requested rates of
/// exactly 0 or 1 are folded into those rows.
pub fn trigger_rate_sweep(ds: &Dataset, signal: &SignalSpec, rates: &[f64]) -> Result<RateSweep> {
    if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::invalid("sweep rate", format!("{r} outside [0, 1]")));
    }
    let baseline = condition_metrics(ds, Condition::Baseline)?;
    let always_on = condition_metrics(ds, Condition::Verification)?;
    let signals = signal_values(ds, signal)?;

    let mut rows = vec![RateRow {
        rate: 0.0,
        threshold: None,
        realized_rate: 0.0,
        metrics: baseline,
    }];
    for &rate in rates.iter().filter(|&&r| r > 0.0 && r < 1.0) {
        let tau = threshold_for_trigger_rate(&signals, rate)?;
        let mask = trigger_mask(&signals, tau);
        rows.push(RateRow {
            rate,
            threshold: Some(tau),
            realized_rate: mask.iter().filter(|&&t| t).count() as f64 / ds.len() as f64,
            metrics: routed_metrics(ds, Condition::Verification, &mask)?,
        });
    }
    rows.push(RateRow {
        rate: 1.0,
        threshold: None,
        realized_rate: 1.0,
        metrics: always_on,
    });
    Ok(RateSweep {
        signal: *signal,
        n: ds.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::dataset_with_signal;

    fn data() -> Dataset {
        let rows: Vec<(&str, &str, &str, f64)> = (0..40)
            .map(|i| match i % 4 {
                0 => ("yes", "no", "yes", 0.9 - i as f64 / 100.0),
                1 => ("no", "no", "yes", 0.5),
                2 => ("yes", "yes", "yes", 0.1),
                _ => ("no", "yes", "no", i as f64 / 100.0),
            })
            .collect();
        dataset_with_signal(&rows)
    }

    #[test]
    fn endpoints_equal_conditions() {
        let ds = data();
        let s = trigger_rate_sweep(&ds, &SignalSpec::inverse_top1(), &DEFAULT_SWEEP_RATES).unwrap();
        assert_eq!(s.rows.len(), DEFAULT_SWEEP_RATES.len() + 2);
        assert_eq!(s.rows[0].metrics, condition_metrics(&ds, Condition::Baseline).unwrap());
        assert_eq!(s.rows.last().unwrap().metrics, condition_metrics(&ds, Condition::Verification).unwrap());
        for row in &s.rows[1..s.rows.len() - 1] {
            assert!(row.realized_rate <= row.rate + 1.0 / 40.0);
        }
    }

    #[test]
    fn endpoint_rates_are_folded() {
        let s = trigger_rate_sweep(&data(), &SignalSpec::inverse_top1(), &[0.0, 0.1, 1.0]).unwrap();
        let rates: Vec<f64> = s.rows.iter().map(|r| r.rate).collect();
        assert_eq!(rates, [0.0, 0.1, 1.0]);
        assert!(trigger_rate_sweep(&data(), &SignalSpec::inverse_top1(), &[1.5]).is_err());
    }
}
