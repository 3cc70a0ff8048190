// SPDX-License-Identifier: Apache-2.0

//! Per-layer views of the attention traces: the layer-wise AUROC sweep and
//! the three-condition attention report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::auroc::auroc;
use crate::error::{Error, Result};
use crate::signals::{attention_entropy, layer_stats, percent_change};
use crate::trace::{Condition, Dataset, PrefillTrace, SampleRecord};

/// Binary target the per-layer entropy is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepLabel {
    /// Verification changes the normalized answer.
    #[default]
    AnswerChanged,
    /// The baseline answer is wrong.
    BaselineWrong,
}

impl SweepLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepLabel::AnswerChanged => "answer_changed",
            SweepLabel::BaselineWrong => "baseline_wrong",
        }
    }

    fn of(self, r: &SampleRecord) -> Result<bool> {
        Ok(match self {
            SweepLabel::AnswerChanged => r.answer(Condition::Baseline)? != r.answer(Condition::Verification)?,
            SweepLabel::BaselineWrong => !r.is_correct(Condition::Baseline)?,
        })
    }
}

impl fmt::Display for SweepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "answer_changed" => Ok(SweepLabel::AnswerChanged),
            "baseline_wrong" => Ok(SweepLabel::BaselineWrong),
            _ => Err(Error::invalid("label", format!("'{s}' (expected answer_changed or baseline_wrong)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerAuroc {
    pub layer: usize,
    pub auroc: f64,
    /// Mean baseline entropy in nats.
    pub mean_entropy: f64,
    /// Mean per-sample percent entropy change under verification; present
    /// when every sample has a verification trace.
    pub delta_h_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSweep {
    pub label: SweepLabel,
    pub n: usize,
    pub positives: usize,
    pub rows: Vec<LayerAuroc>,
}

impl LayerSweep {
    /// Row with the highest AUROC; the lowest layer wins ties.
    pub fn best(&self) -> Option<&LayerAuroc> {
        self.rows.iter().fold(None, |best: Option<&LayerAuroc>, r| match best {
            Some(b) if b.auroc >= r.auroc => Some(b),
            _ => Some(r),
        })
    }
}

fn traces_for(ds: &Dataset, condition: Condition) -> Result<Vec<&PrefillTrace>> {
    ds.records()
        .iter()
        .map(|r| ds.require_trace(&r.sample_id, condition))
        .collect()
}

fn entropy_at(trace: &PrefillTrace, layer: usize) -> Result<f64> {
    attention_entropy(trace.row(layer).expect("layer within shared n_layers"))
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len() as f64;
    values.sum::<f64>() / n
}

/// Scores each layer's baseline attention entropy against `label`.
pub fn layer_sweep(ds: &Dataset, label: SweepLabel) -> Result<LayerSweep> {
    if ds.is_empty() {
        return Err(Error::NoRecords);
    }
    let labels: Vec<bool> = ds.records().iter().map(|r| label.of(r)).collect::<Result<_>>()?;
    let base = traces_for(ds, Condition::Baseline)?;
    let verification = traces_for(ds, Condition::Verification).ok();
    let n_layers = base[0].n_layers();

    let rows = (0..n_layers)
        .map(|layer| {
            let entropies: Vec<f64> = base.iter().map(|t| entropy_at(t, layer)).collect::<Result<_>>()?;
            let delta_h_pct = match &verification {
                Some(v) => Some(mean_percent_change(ds, &base, v, layer)?),
                None => None,
            };
            Ok(LayerAuroc {
                layer,
                auroc: auroc(&entropies, &labels)?,
                mean_entropy: mean(entropies.iter().copied()),
                delta_h_pct,
            })
        })
        .collect::<Result<_>>()?;

    Ok(LayerSweep {
        label,
        n: ds.len(),
        positives: labels.iter().filter(|&&l| l).count(),
        rows,
    })
}

fn mean_percent_change(ds: &Dataset, base: &[&PrefillTrace], other: &[&PrefillTrace], layer: usize) -> Result<f64> {
    let changes: Vec<f64> = base
        .iter()
        .zip(other)
        .zip(ds.records())
        .map(|((b, o), r)| {
            let hb = entropy_at(b, layer)?;
            if hb == 0.0 {
                return Err(Error::ZeroBaselineEntropy {
                    sample_id: r.sample_id.clone(),
                    layer,
                });
            }
            Ok(percent_change(entropy_at(o, layer)?, hb))
        })
        .collect::<Result<_>>()?;
    Ok(mean(changes.into_iter()))
}

/// One layer of the three-condition report. Percentages are signed percent
/// changes relative to baseline, averaged over samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub layer: usize,
    pub delta_h_verification_pct: f64,
    pub delta_h_neutral_pct: f64,
    /// `delta_h_verification_pct - delta_h_neutral_pct`.
    pub diff: f64,
    /// Mean visual mass under verification minus under baseline.
    pub delta_visual_mass: f64,
    /// Mean instruction mass under verification.
    pub instruction_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: usize,
    pub rows: Vec<ConditionRow>,
}

/// Attention changes under the verification and neutral prompts relative to
/// baseline, per layer.
///
/// Every record needs traces under all three conditions; incomplete datasets
/// are rejected with the offending sample ids.
pub fn condition_report(ds: &Dataset) -> Result<ConditionReport> {
    if ds.is_empty() {
        return Err(Error::NoRecords);
    }
    let incomplete: Vec<String> = ds
        .records()
        .iter()
        .filter(|r| Condition::ALL.iter().any(|&c| ds.trace(&r.sample_id, c).is_none()))
        .map(|r| r.sample_id.clone())
        .collect();
    if !incomplete.is_empty() {
        return Err(Error::IncompleteConditions { sample_ids: incomplete });
    }
    let base = traces_for(ds, Condition::Baseline)?;
    let verification = traces_for(ds, Condition::Verification)?;
    let neutral = traces_for(ds, Condition::Neutral)?;

    let rows = (0..base[0].n_layers())
        .map(|layer| {
            let dh_v = mean_percent_change(ds, &base, &verification, layer)?;
            let dh_n = mean_percent_change(ds, &base, &neutral, layer)?;
            let (mut d_vis, mut inst) = (0.0, 0.0);
            for (b, v) in base.iter().zip(&verification) {
                let (sb, sv) = (layer_stats(b, layer)?, layer_stats(v, layer)?);
                d_vis += sv.visual_mass - sb.visual_mass;
                inst += sv.instruction_mass;
            }
            let n = ds.len() as f64;
            Ok(ConditionRow {
                layer,
                delta_h_verification_pct: dh_v,
                delta_h_neutral_pct: dh_n,
                diff: dh_v - dh_n,
                delta_visual_mass: d_vis / n,
                instruction_mass: inst / n,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ConditionReport { n: ds.len(), rows })
}
