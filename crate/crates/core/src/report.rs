// SPDX-License-Identifier: Apache-2.0

//! Report documents and aligned text tables.
//!
//! JSON documents carry unrounded values. Text tables round F1-like metrics
//! to 3 decimals and percentages to 1 decimal.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::analysis::{ConditionReport, EvalRow, FixBreakReport, LayerSweep, OracleCeiling, RateSweep};
use crate::error::Result;
use crate::json;
use crate::routing::RoutingPolicy;

/// Envelope written for every report: kind, effective configuration, results.
#[derive(Debug, Clone, Serialize)]
pub struct Document<'a, T: Serialize> {
    pub report: &'a str,
    pub tool: &'a str,
    pub config: &'a Value,
    pub results: &'a T,
}

impl<'a, T: Serialize> Document<'a, T> {
    pub fn new(report: &'a str, config: &'a Value, results: &'a T) -> Self {
        Self {
            report,
            tool: concat!("verigate ", env!("CARGO_PKG_VERSION")),
            config,
            results,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        json::to_document(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

/// A titled table rendered with space-padded columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub align: Vec<Align>,
    pub rows: Vec<Vec<String>>,
    /// Row indices preceded by a rule.
    pub rules_before: Vec<usize>,
}

impl Table {
    /// First column left-aligned, the rest right-aligned.
    pub fn new(title: impl Into<String>, headers: &[&str]) -> Self {
        let mut align = vec![Align::Right; headers.len()];
        align[0] = Align::Left;
        Self {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            align,
            rows: Vec::new(),
            rules_before: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn rule(&mut self) {
        self.rules_before.push(self.rows.len());
    }

    pub fn render(&self) -> String {
        let width = |i: usize| {
            self.rows
                .iter()
                .map(|r| r[i].chars().count())
                .chain([self.headers[i].chars().count()])
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..self.headers.len()).map(width).collect();
        let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        let line = |cells: &[String]| {
            let mut out = String::new();
            for (i, cell) in cells.iter().enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                let pad = widths[i] - cell.chars().count();
                match self.align[i] {
                    Align::Left => {
                        out.push_str(cell);
                        out.extend(std::iter::repeat_n(' ', pad));
                    }
                    Align::Right => {
                        out.extend(std::iter::repeat_n(' ', pad));
                        out.push_str(cell);
                    }
                }
            }
            out.truncate(out.trim_end().len());
            out
        };

        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "{}", line(&self.headers));
        let _ = writeln!(out, "{}", "-".repeat(total));
        for (i, row) in self.rows.iter().enumerate() {
            if self.rules_before.contains(&i) {
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }
}

/// Metric in `[0, 1]`, 3 decimals.
pub fn metric(x: f64) -> String {
    format!("{x:.3}")
}

/// Signed metric difference, 3 decimals.
pub fn signed(x: f64) -> String {
    format!("{:+.3}", clean(x, 3))
}

/// Signed percentage, 1 decimal.
pub fn signed_pct(x: f64) -> String {
    format!("{:+.1}", clean(x, 1))
}

/// Fraction shown as a percentage, 1 decimal.
pub fn pct(fraction: f64) -> String {
    format!("{:.1}%", 100.0 * fraction)
}

/// Avoids "-0.000" for values that round to zero.
fn clean(x: f64, decimals: i32) -> f64 {
    if (x * 10f64.powi(decimals)).round() == 0.0 {
        0.0
    } else {
        x
    }
}

pub fn fixbreak_table(rows: &[FixBreakReport], splits: &[String], condition: &str) -> Table {
    let mut t = Table::new(
        format!("Fix/break analysis of {condition} prompting relative to baseline"),
        &["Split", "N", "Fixes", "Breaks", "Net", "ΔYes%", "ΔF1"],
    );
    for (split, r) in splits.iter().zip(rows) {
        t.push(vec![
            split.clone(),
            r.n.to_string(),
            r.fixes.to_string(),
            r.breaks.to_string(),
            format!("{:+}", r.net),
            signed_pct(r.delta_yes_pct),
            signed(r.delta_f1),
        ]);
    }
    t
}

pub fn conditions_table(report: &ConditionReport, split: &str) -> Table {
    let mut t = Table::new(
        format!("Attention changes under verification (V) and neutral (N) prompts relative to baseline [{split}, n = {}]", report.n),
        &["Layer", "ΔH_V%", "ΔH_N%", "Diff", "ΔM_vis", "M_inst"],
    );
    for r in &report.rows {
        t.push(vec![
            format!("L{}", r.layer),
            signed_pct(r.delta_h_verification_pct),
            signed_pct(r.delta_h_neutral_pct),
            signed_pct(r.diff),
            signed(r.delta_visual_mass),
            metric(r.instruction_mass),
        ]);
    }
    t
}

pub fn oracle_table(rows: &[OracleCeiling], splits: &[String]) -> Table {
    let mut t = Table::new(
        "Oracle routing ceiling (prompt exactly the fix set)",
        &["Split", "Baseline", "Oracle", "ΔF1", "Prompt%"],
    );
    for (split, r) in splits.iter().zip(rows) {
        t.push(vec![
            split.clone(),
            metric(r.baseline_f1),
            metric(r.f1),
            signed(r.delta_f1),
            format!("{:.1}%", r.prompt_pct),
        ]);
    }
    t
}

pub fn layersweep_table(sweep: &LayerSweep, split: &str) -> Table {
    let mut t = Table::new(
        format!(
            "Layer-wise AUROC of baseline attention entropy for {} [{split}, n = {}, positives = {}]",
            sweep.label, sweep.n, sweep.positives
        ),
        &["Layer", "AUROC", "H (nats)", "ΔH%"],
    );
    for r in &sweep.rows {
        t.push(vec![
            r.layer.to_string(),
            metric(r.auroc),
            metric(r.mean_entropy),
            r.delta_h_pct.map(signed_pct).unwrap_or_else(|| "-".into()),
        ]);
    }
    t
}

fn rate_label(rate: f64, last: bool) -> String {
    match rate {
        0.0 => "Baseline (0%)".into(),
        _ if last => "Always-on (100%)".into(),
        r => {
            let p = 100.0 * r;
            if (p - p.round()).abs() < 1e-9 {
                format!("{}%", p.round())
            } else {
                format!("{p:.1}%")
            }
        }
    }
}

/// Routed F1 per trigger rate (rows) and split (columns). Every sweep must
/// use the same rate list.
pub fn ratesweep_table(sweeps: &[RateSweep], splits: &[String]) -> Table {
    let signal = sweeps.first().map(|s| s.signal.to_string()).unwrap_or_default();
    let mut headers = vec!["Trigger rate"];
    headers.extend(splits.iter().map(String::as_str));
    let mut t = Table::new(format!("Routed F1 across trigger rates ({signal})"), &headers);
    let n_rows = sweeps.first().map_or(0, |s| s.rows.len());
    for i in 0..n_rows {
        if i == 1 || (i == n_rows - 1 && n_rows > 1) {
            t.rule();
        }
        let mut row = vec![rate_label(sweeps[0].rows[i].rate, i == n_rows - 1)];
        row.extend(sweeps.iter().map(|s| metric(s.rows[i].metrics.f1)));
        t.push(row);
    }
    t
}

pub fn evaluate_table(rows: &[EvalRow], signal: &str, level: f64) -> Table {
    let ci = format!("{:.0}% CI", 100.0 * level);
    let rsp_head = format!("ΔRSP [{ci}]");
    let always_head = format!("ΔAlways-on [{ci}]");
    let metric_name = rows.first().map_or("f1".to_string(), |r| r.metric.to_string());
    let mut t = Table::new(
        format!("{metric_name} with routed verification (signal {signal})"),
        &["Split", "Baseline", "Always-on", "RSP", "Trig.%", &rsp_head, "p", &always_head, "p"],
    );
    let interval = |c: &crate::analysis::ConfidenceInterval| {
        format!("{} [{}, {}]", signed(c.point), signed(c.lo), signed(c.hi))
    };
    for r in rows {
        let m = |set: &crate::analysis::MetricSet| metric(r.metric.of(set));
        t.push(vec![
            r.split.clone(),
            m(&r.baseline),
            m(&r.always_on),
            m(&r.routed),
            pct(r.realized_rate),
            interval(&r.routed_vs_baseline),
            format!("{:.4}", r.routed_vs_baseline.p_value),
            interval(&r.always_on_vs_baseline),
            format!("{:.4}", r.always_on_vs_baseline.p_value),
        ]);
    }
    t
}

pub fn calibration_table(policy: &RoutingPolicy) -> Table {
    let c = &policy.calibration;
    let mut t = Table::new(
        format!(
            "Calibration of {} on {} ({}); selected {} with τ = {}",
            policy.signal,
            c.dev_split,
            c.objective,
            pct(c.selected_rate),
            json::format_real(policy.threshold)
        ),
        &["Rate", "τ", "Realized", &c.objective.to_string(), ""],
    );
    for cand in &c.candidates {
        let chosen = cand.rate == c.selected_rate && cand.threshold == policy.threshold;
        t.push(vec![
            pct(cand.rate),
            format!("{:.4}", cand.threshold),
            pct(cand.realized_rate),
            metric(cand.objective),
            if chosen { "*".into() } else { String::new() },
        ]);
    }
    t
}
