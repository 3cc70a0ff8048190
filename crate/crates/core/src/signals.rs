// SPDX-License-Identifier: Apache-2.0

//! Pre-generation uncertainty signals and per-layer attention statistics.
//!
//! All quantities are read off the head-averaged attention row of the final
//! prefill position. Entropy is measured in nats.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Condition, Dataset, PositionRange, PrefillTrace, SampleRecord, ROW_SUM_TOLERANCE};

/// Which scalar signal to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// Attention entropy of one layer's row.
    AttentionEntropy { layer: usize },
    /// `1 - p_top1` of the first generated token.
    InverseTop1Confidence,
}

/// A signal kind plus the condition whose trace or outcome it reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub kind: SignalKind,
    #[serde(default = "baseline")]
    pub condition: Condition,
}

fn baseline() -> Condition {
    Condition::Baseline
}

impl SignalSpec {
    pub fn entropy(layer: usize) -> Self {
        Self {
            kind: SignalKind::AttentionEntropy { layer },
            condition: Condition::Baseline,
        }
    }

    pub fn inverse_top1() -> Self {
        Self {
            kind: SignalKind::InverseTop1Confidence,
            condition: Condition::Baseline,
        }
    }

    pub fn with_condition(mut self, condition: Condition) -> Self {
        self.condition = condition;
        self
    }

    pub fn needs_trace(&self) -> bool {
        matches!(self.kind, SignalKind::AttentionEntropy { .. })
    }
}

/// Parses the command-line form: `entropy:LAYER` or `inv-top1`, optionally
/// followed by `@CONDITION`.
impl FromStr for SignalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("signal", format!("'{s}' (expected entropy:LAYER or inv-top1)"));
        let (body, condition) = match s.split_once('@') {
            Some((body, c)) => (body, c.parse()?),
            None => (s, Condition::Baseline),
        };
        let spec = match body.split_once(':') {
            Some(("entropy", layer)) => layer.parse().map(SignalSpec::entropy).map_err(|_| bad())?,
            None if body == "inv-top1" => SignalSpec::inverse_top1(),
            _ => return Err(bad()),
        };
        Ok(spec.with_condition(condition))
    }
}

impl fmt::Display for SignalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SignalKind::AttentionEntropy { layer } => write!(f, "entropy:{layer}")?,
            SignalKind::InverseTop1Confidence => f.write_str("inv-top1")?,
        }
        if self.condition != Condition::Baseline {
            write!(f, "@{}", self.condition)?;
        }
        Ok(())
    }
}

/// Entropy, visual mass and instruction mass of one layer's row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub layer: usize,
    pub entropy: f64,
    pub visual_mass: f64,
    pub instruction_mass: f64,
}

fn check_probability_row(row: &[f64]) -> Result<()> {
    if let Some((i, w)) = row.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
        return Err(Error::invalid("attention row", format!("position {i} has weight {w}")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(Error::invalid("attention row", format!("weights sum to {sum}")));
    }
    Ok(())
}

/// Shannon entropy `-Σ a ln a` of an attention row, with `0 ln 0 = 0`.
///
/// ```
/// let h = verigate::signals::attention_entropy(&[0.25; 4]).unwrap();
/// assert!((h - 4f64.ln()).abs() < 1e-12);
/// ```
pub fn attention_entropy(row: &[f64]) -> Result<f64> {
    check_probability_row(row)?;
    Ok(entropy_unchecked(row))
}

pub(crate) fn entropy_unchecked(row: &[f64]) -> f64 {
    row.iter().filter(|&&a| a > 0.0).fold(0.0, |h, &a| h - a * a.ln())
}

/// Total weight of `row` over the positions in `segment`.
pub fn segment_mass(row: &[f64], segment: &[PositionRange]) -> Result<f64> {
    segment.iter().try_fold(0.0, |mass, range| {
        let weights = row.get(range.positions()).ok_or_else(|| {
            Error::invalid(
                "segment",
                format!("range [{}, {}] exceeds row length {}", range.start, range.end, row.len()),
            )
        })?;
        Ok(mass + weights.iter().sum::<f64>())
    })
}

/// `1 - top1_prob`.
pub fn inverse_top1_confidence(top1_prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&top1_prob) {
        return Err(Error::invalid("top1_prob", format!("{top1_prob} outside [0, 1]")));
    }
    Ok(1.0 - top1_prob)
}

/// Entropy and segment masses for one layer of a trace.
pub fn layer_stats(trace: &PrefillTrace, layer: usize) -> Result<LayerStats> {
    let row = trace.row(layer).ok_or_else(|| {
        Error::invalid(
            "layer",
            format!("{layer} out of range for trace with {} layers", trace.n_layers()),
        )
    })?;
    Ok(LayerStats {
        layer,
        entropy: attention_entropy(row)?,
        visual_mass: segment_mass(row, &trace.segments.visual)?,
        instruction_mass: segment_mass(row, &trace.segments.instruction)?,
    })
}

/// Evaluates `spec` for one record.
///
/// `trace` must be the record's trace under `spec.condition` when the signal
/// is attention-based; it is ignored otherwise.
pub fn compute_signal(spec: &SignalSpec, record: &SampleRecord, trace: Option<&PrefillTrace>) -> Result<f64> {
    match spec.kind {
        SignalKind::AttentionEntropy { layer } => {
            let trace = trace
                .filter(|t| t.sample_id == record.sample_id && t.condition == spec.condition)
                .ok_or_else(|| Error::MissingTrace {
                    sample_id: record.sample_id.clone(),
                    condition: spec.condition,
                })?;
            let row = trace.row(layer).ok_or_else(|| {
                Error::invalid(
                    "signal layer",
                    format!("{layer} out of range for trace with {} layers", trace.n_layers()),
                )
            })?;
            attention_entropy(row)
        }
        SignalKind::InverseTop1Confidence => inverse_top1_confidence(record.outcome(spec.condition)?.top1_prob()),
    }
}

/// Signal value of every record, in record order.
pub fn signal_values(ds: &Dataset, spec: &SignalSpec) -> Result<Vec<f64>> {
    ds.records()
        .iter()
        .map(|r| compute_signal(spec, r, ds.trace(&r.sample_id, spec.condition)))
        .collect()
}

/// Signed percent change `100 (value - reference) / reference`.
pub fn percent_change(value: f64, reference: f64) -> f64 {
    100.0 * (value - reference) / reference
}
