// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic datasets with planted ground truth.
//!
//! Every planted quantity can be read back by the analyses:
//!
//! * outcome categories come in exact counts, `round(fraction * n)` each;
//! * the baseline yes-rate is `round(yes_rate_base * n) / n` exactly;
//! * at `signal_layer`, the baseline attention entropy is an increasing
//!   function of a latent `z ~ N(d * changed, 1)`, where `changed` marks
//!   fixes and breaks. The function depends on the sample only through the
//!   entropy range its logits allow, which varies little, so the AUROC for
//!   predicting an answer change is close to that of two unit-variance
//!   Gaussians `d` apart, [`expected_auroc`];
//! * the first-token confidence carries the same construction for
//!   baseline-wrong samples with separation `confidence_separation`;
//! * segment masses per condition are exactly the configured values, and the
//!   verification / neutral entropies are the baseline entropy times the
//!   configured per-layer scale.
//!
//! # Algorithm
//!
//! Stream `(seed, 0)` shuffles sample indices into categories and then
//! assigns ground truths inside the baseline-correct and baseline-wrong
//! groups. Sample `i` draws everything else from stream `(seed, i + 1)` in a
//! fixed order: two answer templates, three confidence normals, then for each
//! layer one latent normal and `n_positions` logit normals.
//!
//! Position 0 and the tail form the "other" segment; the visual segment
//! follows position 0 and the instruction segment follows it. An attention
//! row puts mass `M_g` on segment `g` and spreads it as `softmax(β x)` over
//! the segment's logits `x`, which are shared by the three conditions. `β` is
//! solved by safeguarded Newton iteration on the entropy until it matches the
//! target; a residual above [`ENTROPY_TOLERANCE`] is reported as infeasible.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::signals::entropy_unchecked;
use crate::stats::normal_cdf;
use crate::trace::{
    Condition, ConditionOutcome, Dataset, DatasetMeta, GroundTruth, PositionRange, PrefillTrace, SampleRecord,
    SegmentMap, SCHEMA,
};

/// Largest accepted gap between a row's entropy and its planted target.
pub const ENTROPY_TOLERANCE: f64 = 1e-6;

/// Baseline entropy targets span this window of each row's feasible range.
const TARGET_FLOOR: f64 = 0.3;
const TARGET_SPAN: f64 = 0.4;

const YES_TEMPLATES: [&str; 5] = ["Yes", "Yes.", "yes", "Yes, there is.", "Yes, I can see one in the image."];
const NO_TEMPLATES: [&str; 5] = ["No", "No.", "no", "No, there is not.", "No, I don't see one."];

/// One value per prompt condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionValues {
    pub baseline: f64,
    pub verification: f64,
    pub neutral: f64,
}

impl ConditionValues {
    pub fn get(&self, condition: Condition) -> f64 {
        match condition {
            Condition::Baseline => self.baseline,
            Condition::Verification => self.verification,
            Condition::Neutral => self.neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub n_layers: usize,
    pub n_positions: usize,
    pub seed: u64,
    /// Split label written on every record.
    pub split: String,
    pub fix_fraction: f64,
    pub break_fraction: f64,
    pub unchanged_wrong_fraction: f64,
    pub yes_rate_base: f64,
    pub signal_layer: usize,
    /// Latent mean gap between changed and unchanged samples at `signal_layer`.
    pub signal_separation: f64,
    /// Latent mean gap of inverse top-1 confidence between baseline-wrong and
    /// baseline-correct samples.
    pub confidence_separation: f64,
    /// Fraction of positions in the visual segment.
    pub visual_fraction: f64,
    /// Fraction of positions in the instruction segment.
    pub instruction_fraction: f64,
    pub visual_mass: ConditionValues,
    pub instruction_mass: ConditionValues,
    /// Per-layer entropy ratio verification / baseline; one value applies to all layers.
    pub verification_entropy_scale: Vec<f64>,
    /// Per-layer entropy ratio neutral / baseline; one value applies to all layers.
    pub neutral_entropy_scale: Vec<f64>,
    pub include_traces: bool,
    pub include_neutral: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            n_layers: 8,
            n_positions: 32,
            seed: 0,
            split: "synthetic".into(),
            fix_fraction: 0.10,
            break_fraction: 0.05,
            unchanged_wrong_fraction: 0.05,
            yes_rate_base: 0.5,
            signal_layer: 5,
            signal_separation: 1.0,
            confidence_separation: 1.0,
            visual_fraction: 0.5,
            instruction_fraction: 0.25,
            visual_mass: ConditionValues {
                baseline: 0.30,
                verification: 0.28,
                neutral: 0.29,
            },
            instruction_mass: ConditionValues {
                baseline: 0.40,
                verification: 0.45,
                neutral: 0.42,
            },
            verification_entropy_scale: vec![1.0],
            neutral_entropy_scale: vec![1.0],
            include_traces: true,
            include_neutral: true,
        }
    }
}

/// Planted category sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedCounts {
    pub fixes: usize,
    pub breaks: usize,
    pub unchanged_wrong: usize,
    pub unchanged_correct: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Category {
    Fix,
    Break,
    UnchangedWrong,
    UnchangedCorrect,
}

impl Category {
    fn baseline_correct(self) -> bool {
        matches!(self, Category::Break | Category::UnchangedCorrect)
    }

    fn verification_correct(self) -> bool {
        matches!(self, Category::Fix | Category::UnchangedCorrect)
    }

    fn changed(self) -> bool {
        matches!(self, Category::Fix | Category::Break)
    }
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleConfig(msg.into())
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(infeasible(format!("{name} = {v} outside [0, 1]")))
    }
}

impl SynthConfig {
    pub fn planted_counts(&self) -> Result<PlantedCounts> {
        let n = self.n_samples;
        let count = |f: f64| (f * n as f64).round() as usize;
        let (fixes, breaks, unchanged_wrong) = (
            count(self.fix_fraction),
            count(self.break_fraction),
            count(self.unchanged_wrong_fraction),
        );
        let unchanged_correct = n
            .checked_sub(fixes + breaks + unchanged_wrong)
            .ok_or_else(|| infeasible("outcome fractions exceed 1"))?;
        Ok(PlantedCounts {
            fixes,
            breaks,
            unchanged_wrong,
            unchanged_correct,
        })
    }

    fn segment_lengths(&self) -> (usize, usize) {
        let n = self.n_positions as f64;
        (
            (self.visual_fraction * n).round() as usize,
            (self.instruction_fraction * n).round() as usize,
        )
    }

    fn scale(&self, condition: Condition, layer: usize) -> f64 {
        let scales = match condition {
            Condition::Baseline => return 1.0,
            Condition::Verification => &self.verification_entropy_scale,
            Condition::Neutral => &self.neutral_entropy_scale,
        };
        if scales.len() == 1 {
            scales[0]
        } else {
            scales[layer]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(infeasible("n_samples must be at least 1"));
        }
        if self.n_layers == 0 {
            return Err(infeasible("n_layers must be at least 1"));
        }
        if self.n_positions < 4 {
            return Err(infeasible(format!("n_positions = {} below 4", self.n_positions)));
        }
        unit("fix_fraction", self.fix_fraction)?;
        unit("break_fraction", self.break_fraction)?;
        unit("unchanged_wrong_fraction", self.unchanged_wrong_fraction)?;
        unit("yes_rate_base", self.yes_rate_base)?;
        unit("visual_fraction", self.visual_fraction)?;
        unit("instruction_fraction", self.instruction_fraction)?;
        if self.fix_fraction + self.break_fraction > 1.0 {
            return Err(infeasible("fix_fraction + break_fraction exceeds 1"));
        }
        self.planted_counts()?;
        if self.signal_layer >= self.n_layers {
            return Err(infeasible(format!(
                "signal_layer {} outside [0, {})",
                self.signal_layer, self.n_layers
            )));
        }
        for (name, v) in [
            ("signal_separation", self.signal_separation),
            ("confidence_separation", self.confidence_separation),
        ] {
            if !v.is_finite() {
                return Err(infeasible(format!("{name} = {v} is not finite")));
            }
        }
        let (v, i) = self.segment_lengths();
        if v == 0 || i == 0 || 1 + v + i > self.n_positions {
            return Err(infeasible(format!(
                "segments of {v} visual and {i} instruction positions do not fit {} positions after position 0",
                self.n_positions
            )));
        }
        for c in Condition::ALL {
            let (vm, im) = (self.visual_mass.get(c), self.instruction_mass.get(c));
            unit("visual_mass", vm)?;
            unit("instruction_mass", im)?;
            if vm + im > 1.0 {
                return Err(infeasible(format!("{c} segment masses sum to {}", vm + im)));
            }
        }
        for (name, scales) in [
            ("verification_entropy_scale", &self.verification_entropy_scale),
            ("neutral_entropy_scale", &self.neutral_entropy_scale),
        ] {
            if scales.len() != 1 && scales.len() != self.n_layers {
                return Err(infeasible(format!(
                    "{name} has {} values; expected 1 or n_layers = {}",
                    scales.len(),
                    self.n_layers
                )));
            }
            if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                return Err(infeasible(format!("{name} contains {s}")));
            }
        }
        Ok(())
    }
}

/// AUROC of two unit-variance Gaussians whose means differ by `d`: `Φ(d/√2)`.
///
/// ```
/// assert_eq!(verigate::synth::expected_auroc(0.0), 0.5);
/// ```
pub fn expected_auroc(d: f64) -> f64 {
    normal_cdf(d / std::f64::consts::SQRT_2)
}

fn top1_from_latent(z: f64) -> f64 {
    1.0 - 0.5 * normal_cdf(z - 1.0)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Segment id per position: 0 visual, 1 instruction, 2 other.
struct Layout {
    group_of: Vec<usize>,
    segments: SegmentMap,
}

impl Layout {
    fn new(config: &SynthConfig) -> Self {
        let (v, i) = config.segment_lengths();
        let group_of = (0..config.n_positions)
            .map(|p| match p {
                p if (1..1 + v).contains(&p) => 0,
                p if (1 + v..1 + v + i).contains(&p) => 1,
                _ => 2,
            })
            .collect();
        Layout {
            group_of,
            segments: SegmentMap {
                visual: vec![PositionRange::new(1, 1 + v)],
                instruction: vec![PositionRange::new(1 + v, 1 + v + i)],
            },
        }
    }
}

/// Rows of one (sample, layer) at a given temperature and segment masses.
struct RowFamily<'a> {
    logits: &'a [f64],
    group_of: &'a [usize],
    masses: [f64; 3],
    maxima: [f64; 3],
}

impl<'a> RowFamily<'a> {
    fn new(logits: &'a [f64], group_of: &'a [usize], masses: [f64; 3]) -> Self {
        let mut maxima = [f64::NEG_INFINITY; 3];
        for (&x, &g) in logits.iter().zip(group_of) {
            maxima[g] = maxima[g].max(x);
        }
        Self {
            logits,
            group_of,
            masses,
            maxima,
        }
    }

    fn row(&self, beta: f64) -> Vec<f64> {
        let mut row: Vec<f64> = self
            .logits
            .iter()
            .zip(self.group_of)
            .map(|(&x, &g)| (beta * (x - self.maxima[g])).exp())
            .collect();
        let mut totals = [0.0; 3];
        for (&w, &g) in row.iter().zip(self.group_of) {
            totals[g] += w;
        }
        for (w, &g) in row.iter_mut().zip(self.group_of) {
            *w *= self.masses[g] / totals[g];
        }
        row
    }

    /// `dH/dβ = -β Σ_g M_g Var_g(x)`, variances under the in-segment weights.
    fn slope(&self, row: &[f64], beta: f64) -> f64 {
        let mut first = [0.0; 3];
        let mut second = [0.0; 3];
        for ((&w, &x), &g) in row.iter().zip(self.logits).zip(self.group_of) {
            first[g] += w * x;
            second[g] += w * x * x;
        }
        let spread: f64 = (0..3)
            .filter(|&g| self.masses[g] > 0.0)
            .map(|g| second[g] - first[g] * first[g] / self.masses[g])
            .sum();
        -beta * spread
    }

    /// Entropy as `β → ∞`: all of each segment's mass on its top logit.
    fn floor(&self) -> f64 {
        self.masses.iter().filter(|&&m| m > 0.0).map(|&m| -m * m.ln()).sum()
    }

    fn fit(&self, target: f64) -> std::result::Result<Vec<f64>, String> {
        let uniform = self.row(0.0);
        let top = entropy_unchecked(&uniform);
        if (target - top).abs() <= 1e-13 * top.max(1.0) {
            return Ok(uniform);
        }
        if target > top {
            return Err(format!("entropy {target} exceeds the segment maximum {top}"));
        }
        if target <= self.floor() {
            return Err(format!("entropy {target} at or below the segment minimum {}", self.floor()));
        }

        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while entropy_unchecked(&self.row(hi)) > target {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(format!("entropy {target} needs a temperature beyond range"));
            }
        }
        let mut beta = 0.5 * (lo + hi);
        let mut best = (f64::INFINITY, uniform);
        for _ in 0..200 {
            let row = self.row(beta);
            let err = entropy_unchecked(&row) - target;
            let slope = self.slope(&row, beta);
            if err.abs() < best.0 {
                best = (err.abs(), row);
            }
            if err.abs() <= 1e-13 * target {
                break;
            }
            if err > 0.0 {
                lo = beta;
            } else {
                hi = beta;
            }
            let newton = beta - err / slope;
            let next = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == beta || hi - lo <= f64::EPSILON * hi {
                break;
            }
            beta = next;
        }
        if best.0 > ENTROPY_TOLERANCE {
            return Err(format!("entropy residual {} above tolerance", best.0));
        }
        Ok(best.1)
    }
}

fn answer_text(stream_pick: usize, says_yes: bool) -> &'static str {
    if says_yes {
        YES_TEMPLATES[stream_pick]
    } else {
        NO_TEMPLATES[stream_pick]
    }
}

fn assign_categories(config: &SynthConfig, counts: PlantedCounts, stream: &mut Stream) -> Vec<Category> {
    let mut order: Vec<usize> = (0..config.n_samples).collect();
    stream.shuffle(&mut order);
    let mut categories = vec![Category::UnchangedCorrect; config.n_samples];
    let bounds = [
        (counts.fixes, Category::Fix),
        (counts.breaks, Category::Break),
        (counts.unchanged_wrong, Category::UnchangedWrong),
    ];
    let mut at = 0;
    for (len, category) in bounds {
        for &i in &order[at..at + len] {
            categories[i] = category;
        }
        at += len;
    }
    categories
}

/// Ground truths that put the baseline yes count at `round(yes_rate_base * n)`
/// while keeping the yes-truth count near `n / 2`.
fn assign_truths(config: &SynthConfig, categories: &[Category], stream: &mut Stream) -> Vec<GroundTruth> {
    let n = categories.len();
    let mut correct: Vec<usize> = (0..n).filter(|&i| categories[i].baseline_correct()).collect();
    let mut wrong: Vec<usize> = (0..n).filter(|&i| !categories[i].baseline_correct()).collect();
    let yes_target = (config.yes_rate_base * n as f64).round() as i64;
    // a correct samples answer yes because truth is yes; yes_target - a wrong
    // samples answer yes because truth is no
    let a = ((yes_target as f64 + n as f64 / 2.0 - wrong.len() as f64) / 2.0).round() as i64;
    // any yes_target in [0, n] is reachable
    let a = a
        .min(correct.len() as i64)
        .min(yes_target)
        .max(yes_target - wrong.len() as i64)
        .max(0);
    let wrong_no = yes_target - a;
    stream.shuffle(&mut correct);
    stream.shuffle(&mut wrong);
    let mut truths = vec![GroundTruth::Yes; n];
    for &i in &correct[a as usize..] {
        truths[i] = GroundTruth::No;
    }
    for &i in &wrong[..wrong_no as usize] {
        truths[i] = GroundTruth::No;
    }
    truths
}

/// Generates a dataset; identical configs give identical datasets.
pub fn generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let counts = config.planted_counts()?;
    let mut stream0 = Stream::new(config.seed, 0);
    let categories = assign_categories(config, counts, &mut stream0);
    let truths = assign_truths(config, &categories, &mut stream0);
    let layout = Layout::new(config);
    let conditions: &[Condition] = if config.include_neutral {
        &Condition::ALL
    } else {
        &Condition::ALL[..2]
    };

    let mut records = Vec::with_capacity(config.n_samples);
    let mut traces = Vec::new();
    for (i, (&category, &truth)) in categories.iter().zip(&truths).enumerate() {
        let mut stream = Stream::new(config.seed, i as u64 + 1);
        let sample_id = format!("q{i:05}");
        let base_yes = truth.is_yes() == category.baseline_correct();
        let verif_yes = truth.is_yes() == category.verification_correct();
        let base_raw = answer_text(stream.index(YES_TEMPLATES.len()), base_yes);
        let verif_raw = answer_text(stream.index(YES_TEMPLATES.len()), verif_yes);
        let wrong = if category.baseline_correct() { 0.0 } else { 1.0 };
        let top1_base = top1_from_latent(stream.normal() + config.confidence_separation * wrong);
        let top1_verif = top1_from_latent(stream.normal());
        let top1_neutral = top1_from_latent(stream.normal());

        let mut outcomes = BTreeMap::from([
            (Condition::Baseline, ConditionOutcome::new(base_raw, top1_base)),
            (Condition::Verification, ConditionOutcome::new(verif_raw, top1_verif)),
        ]);
        if config.include_neutral {
            outcomes.insert(Condition::Neutral, ConditionOutcome::new(base_raw, top1_neutral));
        }
        records.push(SampleRecord {
            sample_id: sample_id.clone(),
            split: config.split.clone(),
            ground_truth: truth,
            outcomes,
        });

        if !config.include_traces {
            continue;
        }
        let mut layers: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(config.n_layers); conditions.len()];
        for layer in 0..config.n_layers {
            let shift = if layer == config.signal_layer && category.changed() {
                config.signal_separation
            } else {
                0.0
            };
            let z = stream.normal() + shift;
            let logits: Vec<f64> = (0..config.n_positions).map(|_| stream.normal()).collect();
            let mut base_entropy = 0.0;
            for (k, &condition) in conditions.iter().enumerate() {
                let other = 1.0 - config.visual_mass.get(condition) - config.instruction_mass.get(condition);
                let family = RowFamily::new(
                    &logits,
                    &layout.group_of,
                    [
                        config.visual_mass.get(condition),
                        config.instruction_mass.get(condition),
                        other.max(0.0),
                    ],
                );
                let target = if condition == Condition::Baseline {
                    let floor = family.floor();
                    let top = entropy_unchecked(&family.row(0.0));
                    let f = TARGET_FLOOR + TARGET_SPAN * logistic(0.5 * (z - config.signal_separation / 2.0));
                    floor + f * (top - floor)
                } else {
                    config.scale(condition, layer) * base_entropy
                };
                let row = family.fit(target).map_err(|e| {
                    infeasible(format!("sample {sample_id}, layer {layer}, {condition}: {e}"))
                })?;
                if condition == Condition::Baseline {
                    base_entropy = entropy_unchecked(&row);
                }
                layers[k].push(row);
            }
        }
        for (&condition, layers) in conditions.iter().zip(layers) {
            traces.push(PrefillTrace {
                sample_id: sample_id.clone(),
                condition,
                segments: layout.segments.clone(),
                layers,
            });
        }
    }

    let meta = DatasetMeta {
        schema: SCHEMA.to_string(),
        model: Some("synthetic".into()),
        created_by: Some(format!("verigate synth (seed {})", config.seed)),
    };
    Dataset::new(records, traces, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{condition_metrics, fix_break_table};
    use crate::signals::layer_stats;

    fn small() -> SynthConfig {
        SynthConfig {
            n_samples: 200,
            n_layers: 3,
            n_positions: 16,
            signal_layer: 1,
            ..Default::default()
        }
    }

    #[test]
    fn expected_auroc_reference() {
        assert_eq!(expected_auroc(0.0), 0.5);
        // scipy.stats.norm.cdf(1 / sqrt(2))
        assert!((expected_auroc(1.0) - 0.7602499389065233).abs() < 1e-12);
        assert!(expected_auroc(20.0) > 1.0 - 1e-12);
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap().to_lines().unwrap();
        let b = generate(&small()).unwrap().to_lines().unwrap();
        assert_eq!(a, b);
        let c = generate(&SynthConfig { seed: 1, ..small() }).unwrap().to_lines().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn planted_counts_and_yes_rate() {
        let config = SynthConfig {
            include_traces: false,
            ..Default::default()
        };
        let ds = generate(&config).unwrap();
        let t = fix_break_table(&ds, Condition::Verification).unwrap();
        assert_eq!((t.fixes, t.breaks, t.net), (100, 50, 50));
        assert_eq!(t.unchanged_wrong, 50);
        assert_eq!(condition_metrics(&ds, Condition::Baseline).unwrap().yes_rate, 0.5);
        let yes_truths = ds.records().iter().filter(|r| r.ground_truth.is_yes()).count();
        assert_eq!(yes_truths, 500);
    }

    #[test]
    fn skewed_yes_rate() {
        let config = SynthConfig {
            yes_rate_base: 0.4,
            include_traces: false,
            ..Default::default()
        };
        let ds = generate(&config).unwrap();
        assert_eq!(condition_metrics(&ds, Condition::Baseline).unwrap().yes_rate, 0.4);
    }

    #[test]
    fn every_yes_rate_is_reachable() {
        for (yes, fix, brk) in [(0.0, 0.1, 0.05), (1.0, 0.1, 0.05), (0.265, 0.18, 0.02), (0.9, 0.3, 0.3)] {
            let config = SynthConfig {
                n_samples: 208,
                yes_rate_base: yes,
                fix_fraction: fix,
                break_fraction: brk,
                include_traces: false,
                ..Default::default()
            };
            let ds = generate(&config).unwrap();
            let target = (yes * 208.0_f64).round() / 208.0;
            assert_eq!(condition_metrics(&ds, Condition::Baseline).unwrap().yes_rate, target);
            let t = fix_break_table(&ds, Condition::Verification).unwrap();
            assert_eq!((t.fixes, t.breaks), config.planted_counts().map(|c| (c.fixes, c.breaks)).unwrap());
        }
    }

    #[test]
    fn masses_and_scales_are_recovered() {
        let config = SynthConfig {
            verification_entropy_scale: vec![1.1, 0.9, 1.0],
            neutral_entropy_scale: vec![0.8],
            ..small()
        };
        let ds = generate(&config).unwrap();
        for r in ds.records() {
            for c in Condition::ALL {
                let t = ds.trace(&r.sample_id, c).unwrap();
                for l in 0..3 {
                    let s = layer_stats(t, l).unwrap();
                    assert!((s.visual_mass - config.visual_mass.get(c)).abs() < 1e-9);
                    assert!((s.instruction_mass - config.instruction_mass.get(c)).abs() < 1e-9);
                    let hb = layer_stats(ds.trace(&r.sample_id, Condition::Baseline).unwrap(), l).unwrap().entropy;
                    assert!((s.entropy - config.scale(c, l) * hb).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn infeasible_configs() {
        let bad = [
            SynthConfig { fix_fraction: 0.7, break_fraction: 0.5, ..small() },
            SynthConfig { fix_fraction: 0.5, break_fraction: 0.3, unchanged_wrong_fraction: 0.3, ..small() },
            SynthConfig { n_positions: 3, ..small() },
            SynthConfig { signal_layer: 3, ..small() },
            SynthConfig { verification_entropy_scale: vec![1.0, 1.0], ..small() },
            SynthConfig { verification_entropy_scale: vec![5.0], ..small() },
        ];
        for config in bad {
            assert!(matches!(generate(&config), Err(Error::InfeasibleConfig(_))), "{config:?}");
        }
    }

    #[test]
    fn config_json_defaults() {
        let config: SynthConfig = serde_json::from_str(r#"{"n_samples": 10, "seed": 3}"#).unwrap();
        assert_eq!(config, SynthConfig { n_samples: 10, seed: 3, ..Default::default() });
        assert!(serde_json::from_str::<SynthConfig>(r#"{"n_sample": 10}"#).is_err());
    }
}
