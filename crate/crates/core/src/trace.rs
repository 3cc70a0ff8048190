// SPDX-License-Identifier: Apache-2.0

//! Trace and record model: in-memory types, the line-delimited file format,
//! and validation.
//!
//! A dataset file mixes three kinds of lines in any order:
//!
//! * `record` lines, one per benchmark question, carrying the ground truth and
//!   the raw answer plus first-token top-1 probability under each prompt
//!   condition;
//! * `trace` lines, one per (sample, condition), carrying the head-averaged
//!   attention row of the final prefill position for every layer together
//!   with the visual / instruction token segmentation;
//! * an optional `meta` line with the model tag and creation info.
//!
//! Every line carries a `schema` tag of the form `verigate/<major>[.<minor>]`;
//! only major version 1 is accepted.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::json;

/// Schema tag written on every line.
pub const SCHEMA: &str = "verigate/1";

/// Accepted deviation of an attention row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

const SCHEMA_NAME: &str = "verigate";
const SCHEMA_MAJOR: u32 = 1;

/// Prompt condition under which a sample was run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Baseline,
    Verification,
    Neutral,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Baseline, Condition::Verification, Condition::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::Verification => "verification",
            Condition::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid("condition", format!("'{s}' (expected baseline, verification or neutral)")))
    }
}

/// Normalized yes/no answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unparseable,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unparseable => "unparseable",
        })
    }
}

/// Ground-truth label of a yes/no question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundTruth {
    Yes,
    No,
}

impl GroundTruth {
    pub fn answer(self) -> Answer {
        match self {
            GroundTruth::Yes => Answer::Yes,
            GroundTruth::No => Answer::No,
        }
    }

    pub fn is_yes(self) -> bool {
        self == GroundTruth::Yes
    }
}

/// Maps a raw generation to a yes/no answer.
///
/// Lowercases, skips leading non-alphanumeric characters and compares the
/// leading alphanumeric token against `yes` and `no`.
///
/// ```
/// use verigate::trace::{parse_answer, Answer};
/// assert_eq!(parse_answer("Yes, there is a dog."), Answer::Yes);
/// assert_eq!(parse_answer("  \"No.\""), Answer::No);
/// assert_eq!(parse_answer("Nope"), Answer::Unparseable);
/// ```
pub fn parse_answer(raw: &str) -> Answer {
    let rest = raw.trim_start_matches(|c: char| !c.is_alphanumeric());
    let token: String = rest
        .chars()
        .take_while(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect();
    match token.as_str() {
        "yes" => Answer::Yes,
        "no" => Answer::No,
        _ => Answer::Unparseable,
    }
}

/// Half-open range of token positions, written as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct PositionRange {
    pub start: usize,
    pub end: usize,
}

impl PositionRange {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

impl From<[usize; 2]> for PositionRange {
    fn from([start, end]: [usize; 2]) -> Self {
        Self { start, end }
    }
}

impl From<PositionRange> for [usize; 2] {
    fn from(r: PositionRange) -> Self {
        [r.start, r.end]
    }
}

/// Visual and instruction token positions of one input. Positions in
/// neither list belong to the implied "other" segment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentMap {
    #[serde(default)]
    pub visual: Vec<PositionRange>,
    #[serde(default)]
    pub instruction: Vec<PositionRange>,
}

impl SegmentMap {
    /// Checks ordering, disjointness and bounds against a row of length `n`.
    pub fn check(&self, n: usize) -> std::result::Result<(), String> {
        for (name, ranges) in [("visual", &self.visual), ("instruction", &self.instruction)] {
            let mut prev_end = 0;
            for (i, r) in ranges.iter().enumerate() {
                if r.start >= r.end {
                    return Err(format!("{name} range [{}, {}] is empty or reversed", r.start, r.end));
                }
                if i > 0 && r.start < prev_end {
                    return Err(format!("{name} ranges are not sorted and disjoint at [{}, {}]", r.start, r.end));
                }
                if r.end > n {
                    return Err(format!("{name} range [{}, {}] exceeds row length {n}", r.start, r.end));
                }
                prev_end = r.end;
            }
        }
        // both lists are sorted, so a merge walk finds any overlap
        let (mut i, mut j) = (0, 0);
        while i < self.visual.len() && j < self.instruction.len() {
            let (v, t) = (self.visual[i], self.instruction[j]);
            if v.start < t.end && t.start < v.end {
                return Err(format!(
                    "visual range [{}, {}] overlaps instruction range [{}, {}]",
                    v.start, v.end, t.start, t.end
                ));
            }
            if v.end <= t.start {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(())
    }
}

/// Head-averaged attention of the final prefill position, one row per layer,
/// for a single (sample, condition) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefillTrace {
    pub sample_id: String,
    pub condition: Condition,
    pub segments: SegmentMap,
    pub layers: Vec<Vec<f64>>,
}

impl PrefillTrace {
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Number of key positions per row.
    pub fn n_positions(&self) -> usize {
        self.layers.first().map_or(0, Vec::len)
    }

    pub fn row(&self, layer: usize) -> Option<&[f64]> {
        self.layers.get(layer).map(Vec::as_slice)
    }

    /// Returns the name of the first violated invariant and a description.
    pub fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.layers.is_empty() {
            return Err(("n_layers", "trace has no layers".into()));
        }
        let n = self.n_positions();
        if n == 0 {
            return Err(("row-length", "attention rows are empty".into()));
        }
        for (l, row) in self.layers.iter().enumerate() {
            if row.len() != n {
                return Err(("row-length", format!("layer {l} has {} positions, layer 0 has {n}", row.len())));
            }
            if let Some((i, w)) = row.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
                return Err(("nonnegative-weight", format!("layer {l} position {i} has weight {w}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(("row-sum", format!("layer {l} sums to {sum}")));
            }
        }
        self.segments.check(n).map_err(|detail| ("segment", detail))
    }
}

/// Answer and first-token confidence under one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutcome {
    answer_raw: String,
    answer: Answer,
    top1_prob: f64,
}

impl ConditionOutcome {
    /// Builds an outcome; the normalized answer is derived from `answer_raw`.
    pub fn new(answer_raw: impl Into<String>, top1_prob: f64) -> Self {
        let answer_raw = answer_raw.into();
        Self {
            answer: parse_answer(&answer_raw),
            answer_raw,
            top1_prob,
        }
    }

    pub fn answer_raw(&self) -> &str {
        &self.answer_raw
    }

    pub fn answer(&self) -> Answer {
        self.answer
    }

    pub fn top1_prob(&self) -> f64 {
        self.top1_prob
    }

    /// Unparseable answers count as incorrect.
    pub fn is_correct(&self, truth: GroundTruth) -> bool {
        self.answer == truth.answer()
    }
}

/// One benchmark question with its per-condition outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub sample_id: String,
    pub split: String,
    pub ground_truth: GroundTruth,
    pub outcomes: BTreeMap<Condition, ConditionOutcome>,
}

impl SampleRecord {
    pub fn outcome(&self, condition: Condition) -> Result<&ConditionOutcome> {
        self.outcomes.get(&condition).ok_or_else(|| Error::MissingOutcome {
            sample_id: self.sample_id.clone(),
            condition,
        })
    }

    pub fn answer(&self, condition: Condition) -> Result<Answer> {
        self.outcome(condition).map(ConditionOutcome::answer)
    }

    pub fn is_correct(&self, condition: Condition) -> Result<bool> {
        Ok(self.outcome(condition)?.is_correct(self.ground_truth))
    }

    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.sample_id.is_empty() {
            return Err(("sample-id", "sample_id is empty".into()));
        }
        if !self.outcomes.contains_key(&Condition::Baseline) {
            return Err(("baseline-present", "record has no baseline outcome".into()));
        }
        for (condition, outcome) in &self.outcomes {
            let p = outcome.top1_prob;
            if !(0.0..=1.0).contains(&p) {
                return Err(("top1-range", format!("{condition} top1_prob {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// File-level metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetMeta {
    pub schema: String,
    pub model: Option<String>,
    pub created_by: Option<String>,
}

impl Default for DatasetMeta {
    fn default() -> Self {
        Self {
            schema: SCHEMA.to_string(),
            model: None,
            created_by: None,
        }
    }
}

/// A validated, immutable collection of records and their traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<SampleRecord>,
    index: HashMap<String, usize>,
    traces: BTreeMap<String, BTreeMap<Condition, PrefillTrace>>,
    n_layers: Option<usize>,
    meta: DatasetMeta,
}

impl Dataset {
    /// Validates and assembles a dataset from in-memory parts.
    pub fn new(records: Vec<SampleRecord>, traces: Vec<PrefillTrace>, meta: DatasetMeta) -> Result<Self> {
        let mut builder = Builder {
            meta: Some(meta),
            ..Builder::default()
        };
        for record in records {
            builder.add_record(record, None)?;
        }
        for trace in traces {
            builder.add_trace(trace, None)?;
        }
        builder.finish()
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn record(&self, sample_id: &str) -> Option<&SampleRecord> {
        self.index.get(sample_id).map(|&i| &self.records[i])
    }

    pub fn trace(&self, sample_id: &str, condition: Condition) -> Option<&PrefillTrace> {
        self.traces.get(sample_id)?.get(&condition)
    }

    /// Like [`Dataset::trace`] but reports a missing trace as an error.
    pub fn require_trace(&self, sample_id: &str, condition: Condition) -> Result<&PrefillTrace> {
        self.trace(sample_id, condition).ok_or_else(|| Error::MissingTrace {
            sample_id: sample_id.to_string(),
            condition,
        })
    }

    pub fn traces(&self) -> impl Iterator<Item = &PrefillTrace> {
        self.traces.values().flat_map(BTreeMap::values)
    }

    pub fn trace_count(&self) -> usize {
        self.traces.values().map(BTreeMap::len).sum()
    }

    /// Layer count shared by every trace, if there are any traces.
    pub fn n_layers(&self) -> Option<usize> {
        self.n_layers
    }

    /// Distinct split labels in first-appearance order.
    pub fn split_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.records {
            if !names.contains(&r.split) {
                names.push(r.split.clone());
            }
        }
        names
    }

    /// The records of one split together with their traces.
    pub fn split(&self, name: &str) -> Dataset {
        let records: Vec<SampleRecord> = self.records.iter().filter(|r| r.split == name).cloned().collect();
        let traces = records
            .iter()
            .filter_map(|r| self.traces.get(&r.sample_id).map(|t| (r.sample_id.clone(), t.clone())))
            .collect();
        let index = records.iter().enumerate().map(|(i, r)| (r.sample_id.clone(), i)).collect();
        Dataset {
            records,
            index,
            traces,
            n_layers: self.n_layers,
            meta: self.meta.clone(),
        }
    }

    /// Writes the dataset in the line-delimited format: optional meta line,
    /// records in order, then traces grouped by sample.
    pub fn write_lines<W: Write>(&self, mut out: W) -> Result<()> {
        let io_err = |source| Error::Io {
            path: "<output>".into(),
            source,
        };
        if self.meta.model.is_some() || self.meta.created_by.is_some() {
            let line = json::to_line(&MetaLine {
                kind: Kind::Meta,
                schema: self.meta.schema.clone(),
                model: self.meta.model.clone(),
                created_by: self.meta.created_by.clone(),
            })?;
            writeln!(out, "{line}").map_err(io_err)?;
        }
        for record in &self.records {
            writeln!(out, "{}", json::to_line(&RecordLine::from_record(record, &self.meta.schema))?).map_err(io_err)?;
        }
        for record in &self.records {
            for trace in self.traces.get(&record.sample_id).into_iter().flat_map(BTreeMap::values) {
                let line = TraceLine {
                    kind: Kind::Trace,
                    schema: self.meta.schema.clone(),
                    sample_id: trace.sample_id.clone(),
                    condition: trace.condition,
                    segments: trace.segments.clone(),
                    layers: trace.layers.clone(),
                };
                writeln!(out, "{}", json::to_line(&line)?).map_err(io_err)?;
            }
        }
        Ok(())
    }

    pub fn to_lines(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_lines(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serializer emits UTF-8"))
    }

    /// Parses and validates the line-delimited format.
    pub fn parse_lines(text: &str) -> Result<Self> {
        let mut builder = Builder::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            match parse_line(raw, line)? {
                Line::Record(record) => builder.add_record(record, Some(line))?,
                Line::Trace(trace) => builder.add_trace(trace, Some(line))?,
                Line::Meta(meta) => builder.set_meta(meta, line)?,
            }
        }
        builder.finish()
    }
}

/// Reads and validates a dataset file.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Dataset::parse_lines(&text)
}

#[derive(Default)]
struct Builder {
    records: Vec<SampleRecord>,
    index: HashMap<String, usize>,
    traces: BTreeMap<String, BTreeMap<Condition, PrefillTrace>>,
    trace_lines: HashMap<(String, Condition), Option<usize>>,
    meta: Option<DatasetMeta>,
}

impl Builder {
    fn add_record(&mut self, record: SampleRecord, line: Option<usize>) -> Result<()> {
        record.check().map_err(|(invariant, detail)| Error::Invariant {
            line,
            sample_id: record.sample_id.clone(),
            invariant,
            detail,
        })?;
        if self.index.contains_key(&record.sample_id) {
            return Err(Error::DuplicateSample {
                line,
                sample_id: record.sample_id,
            });
        }
        self.index.insert(record.sample_id.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    fn add_trace(&mut self, trace: PrefillTrace, line: Option<usize>) -> Result<()> {
        trace.check().map_err(|(invariant, detail)| Error::Invariant {
            line,
            sample_id: trace.sample_id.clone(),
            invariant,
            detail,
        })?;
        let by_condition = self.traces.entry(trace.sample_id.clone()).or_default();
        if by_condition.contains_key(&trace.condition) {
            return Err(Error::DuplicateTrace {
                line,
                sample_id: trace.sample_id,
                condition: trace.condition,
            });
        }
        self.trace_lines.insert((trace.sample_id.clone(), trace.condition), line);
        by_condition.insert(trace.condition, trace);
        Ok(())
    }

    fn set_meta(&mut self, meta: DatasetMeta, line: usize) -> Result<()> {
        if self.meta.is_some() {
            return Err(Error::Malformed {
                line,
                message: "more than one meta line".into(),
            });
        }
        self.meta = Some(meta);
        Ok(())
    }

    fn finish(self) -> Result<Dataset> {
        if self.records.is_empty() {
            return Err(Error::NoRecords);
        }
        // Checks that span lines run after every line is read, and in sorted
        // key order, so line order cannot change the accept/reject outcome.
        let mut n_layers: Option<usize> = None;
        for (sample_id, by_condition) in &self.traces {
            for (condition, trace) in by_condition {
                let line = self.trace_lines[&(sample_id.clone(), *condition)];
                if !self.index.contains_key(sample_id) {
                    return Err(Error::DanglingTrace {
                        line,
                        sample_id: sample_id.clone(),
                    });
                }
                match n_layers {
                    None => n_layers = Some(trace.n_layers()),
                    Some(expected) if expected != trace.n_layers() => {
                        return Err(Error::Invariant {
                            line,
                            sample_id: sample_id.clone(),
                            invariant: "shared-n_layers",
                            detail: format!(
                                "{condition} trace has {} layers, other traces have {expected}",
                                trace.n_layers()
                            ),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Dataset {
            records: self.records,
            index: self.index,
            traces: self.traces,
            n_layers,
            meta: self.meta.unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Record,
    Trace,
    Meta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeLine {
    answer_raw: String,
    top1_prob: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    kind: Kind,
    schema: String,
    sample_id: String,
    split: String,
    ground_truth: GroundTruth,
    outcomes: BTreeMap<Condition, OutcomeLine>,
}

impl RecordLine {
    fn from_record(record: &SampleRecord, schema: &str) -> Self {
        Self {
            kind: Kind::Record,
            schema: schema.to_string(),
            sample_id: record.sample_id.clone(),
            split: record.split.clone(),
            ground_truth: record.ground_truth,
            outcomes: record
                .outcomes
                .iter()
                .map(|(c, o)| {
                    (
                        *c,
                        OutcomeLine {
                            answer_raw: o.answer_raw.clone(),
                            top1_prob: o.top1_prob,
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceLine {
    kind: Kind,
    schema: String,
    sample_id: String,
    condition: Condition,
    segments: SegmentMap,
    layers: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLine {
    kind: Kind,
    schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    created_by: Option<String>,
}

enum Line {
    Record(SampleRecord),
    Trace(PrefillTrace),
    Meta(DatasetMeta),
}

fn check_schema(schema: &str, line: usize) -> Result<()> {
    let bad = || Error::SchemaVersion {
        line,
        found: schema.to_string(),
    };
    let (name, version) = schema.split_once('/').ok_or_else(bad)?;
    let major = version.split('.').next().unwrap_or_default();
    if name != SCHEMA_NAME || major.parse::<u32>().ok() != Some(SCHEMA_MAJOR) {
        return Err(bad());
    }
    Ok(())
}

fn parse_line(raw: &str, line: usize) -> Result<Line> {
    let malformed = |message: String| Error::Malformed { line, message };
    let value: Value = serde_json::from_str(raw).map_err(|e| malformed(format!("invalid JSON: {e}")))?;
    let object = value.as_object().ok_or_else(|| malformed("line is not a JSON object".into()))?;
    let schema = object
        .get("schema")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing string field 'schema'".into()))?;
    check_schema(schema, line)?;
    let kind = object
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing string field 'kind'".into()))?;
    let kind: Kind = serde_json::from_value(Value::String(kind.to_string()))
        .map_err(|_| malformed(format!("unknown kind '{kind}'")))?;
    let invalid = |e: serde_json::Error| malformed(format!("invalid {kind:?} line: {e}").to_lowercase());
    Ok(match kind {
        Kind::Record => {
            let r: RecordLine = serde_json::from_value(value).map_err(invalid)?;
            Line::Record(SampleRecord {
                sample_id: r.sample_id,
                split: r.split,
                ground_truth: r.ground_truth,
                outcomes: r
                    .outcomes
                    .into_iter()
                    .map(|(c, o)| (c, ConditionOutcome::new(o.answer_raw, o.top1_prob)))
                    .collect(),
            })
        }
        Kind::Trace => {
            let t: TraceLine = serde_json::from_value(value).map_err(invalid)?;
            Line::Trace(PrefillTrace {
                sample_id: t.sample_id,
                condition: t.condition,
                segments: t.segments,
                layers: t.layers,
            })
        }
        Kind::Meta => {
            let m: MetaLine = serde_json::from_value(value).map_err(invalid)?;
            Line::Meta(DatasetMeta {
                schema: m.schema,
                model: m.model,
                created_by: m.created_by,
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record_line(id: &str) -> String {
        format!(
            r#"{{"kind":"record","schema":"verigate/1","sample_id":"{id}","split":"random","ground_truth":"yes","outcomes":{{"baseline":{{"answer_raw":"Yes","top1_prob":0.9}},"verification":{{"answer_raw":"No","top1_prob":0.6}}}}}}"#
        )
    }

    fn trace_line(id: &str, row: &str) -> String {
        format!(
            r#"{{"kind":"trace","schema":"verigate/1","sample_id":"{id}","condition":"baseline","segments":{{"visual":[[0,2]],"instruction":[[2,3]]}},"layers":[{row},{row}]}}"#
        )
    }

    #[test]
    fn parses_answers() {
        assert_eq!(parse_answer("Yes, there is a dog."), Answer::Yes);
        assert_eq!(parse_answer("no"), Answer::No);
        assert_eq!(parse_answer("I cannot tell."), Answer::Unparseable);
        assert_eq!(parse_answer("...YES!"), Answer::Yes);
        assert_eq!(parse_answer("Noun"), Answer::Unparseable);
        assert_eq!(parse_answer(""), Answer::Unparseable);
        assert_eq!(parse_answer("\n  no, it is not"), Answer::No);
    }

    #[test]
    fn parse_answer_is_idempotent_on_canonical_output() {
        for a in [Answer::Yes, Answer::No, Answer::Unparseable] {
            assert_eq!(parse_answer(&a.to_string()), a);
        }
    }

    #[test]
    fn loads_records_without_traces() {
        let text = [record_line("q1"), record_line("q2"), record_line("q3")].join("\n");
        let ds = Dataset::parse_lines(&text).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.trace_count(), 0);
        assert_eq!(ds.n_layers(), None);
        assert_eq!(ds.records()[0].answer(Condition::Verification).unwrap(), Answer::No);
    }

    #[test]
    fn rejects_row_sum_violation() {
        let text = [record_line("q1"), trace_line("q1", "[0.5,0.3,0.1]")].join("\n");
        match Dataset::parse_lines(&text).unwrap_err() {
            Error::Invariant {
                line,
                sample_id,
                invariant,
                ..
            } => {
                assert_eq!(line, Some(2));
                assert_eq!(sample_id, "q1");
                assert_eq!(invariant, "row-sum");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_dangling_trace() {
        let text = [record_line("q1"), trace_line("q999", "[0.5,0.3,0.2]")].join("\n");
        let err = Dataset::parse_lines(&text).unwrap_err();
        assert!(matches!(err, Error::DanglingTrace { line: Some(2), ref sample_id } if sample_id == "q999"));
    }

    #[test]
    fn trace_before_record_is_accepted() {
        let text = [trace_line("q1", "[0.5,0.3,0.2]"), record_line("q1")].join("\n");
        let ds = Dataset::parse_lines(&text).unwrap();
        assert_eq!(ds.n_layers(), Some(2));
        assert!(ds.trace("q1", Condition::Baseline).is_some());
    }

    #[test]
    fn rejects_unknown_major_version() {
        let text = record_line("q1").replace("verigate/1", "verigate/2");
        assert!(matches!(
            Dataset::parse_lines(&text).unwrap_err(),
            Error::SchemaVersion { line: 1, .. }
        ));
        let minor = record_line("q1").replace("verigate/1", "verigate/1.3");
        assert!(Dataset::parse_lines(&minor).is_ok());
    }

    #[test]
    fn reports_malformed_line_number() {
        let text = [record_line("q1"), String::new(), "{not json".to_string()].join("\n");
        assert!(matches!(Dataset::parse_lines(&text).unwrap_err(), Error::Malformed { line: 3, .. }));
    }

    #[test]
    fn rejects_empty_input() {
        assert!(matches!(Dataset::parse_lines("\n\n").unwrap_err(), Error::NoRecords));
    }

    #[test]
    fn rejects_missing_baseline_and_duplicates() {
        let no_base = record_line("q1").replace("\"baseline\"", "\"neutral\"");
        assert!(matches!(
            Dataset::parse_lines(&no_base).unwrap_err(),
            Error::Invariant { invariant: "baseline-present", .. }
        ));
        let dup = [record_line("q1"), record_line("q1")].join("\n");
        assert!(matches!(
            Dataset::parse_lines(&dup).unwrap_err(),
            Error::DuplicateSample { line: Some(2), .. }
        ));
    }

    #[test]
    fn rejects_bad_segments() {
        let overlap = trace_line("q1", "[0.5,0.3,0.2]").replace("[[2,3]]", "[[1,3]]");
        let text = [record_line("q1"), overlap].join("\n");
        assert!(matches!(
            Dataset::parse_lines(&text).unwrap_err(),
            Error::Invariant { invariant: "segment", .. }
        ));
        let out_of_range = trace_line("q1", "[0.5,0.3,0.2]").replace("[[2,3]]", "[[2,4]]");
        let text = [record_line("q1"), out_of_range].join("\n");
        assert!(Dataset::parse_lines(&text).is_err());
    }

    #[test]
    fn rejects_mixed_layer_counts() {
        let one_layer = trace_line("q2", "[0.5,0.3,0.2]").replace(",[0.5,0.3,0.2]]", "]");
        let text = [record_line("q1"), record_line("q2"), trace_line("q1", "[0.5,0.3,0.2]"), one_layer].join("\n");
        assert!(matches!(
            Dataset::parse_lines(&text).unwrap_err(),
            Error::Invariant { invariant: "shared-n_layers", .. }
        ));
    }

    #[test]
    fn round_trips_with_meta() {
        let meta = r#"{"kind":"meta","schema":"verigate/1","model":"llava-1.5-7b"}"#;
        let text = [meta.to_string(), record_line("q1"), trace_line("q1", "[0.5,0.3,0.2]")].join("\n");
        let ds = Dataset::parse_lines(&text).unwrap();
        assert_eq!(ds.meta().model.as_deref(), Some("llava-1.5-7b"));
        let again = Dataset::parse_lines(&ds.to_lines().unwrap()).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn segment_overlap_walk() {
        let seg = SegmentMap {
            visual: vec![PositionRange::new(0, 2), PositionRange::new(5, 8)],
            instruction: vec![PositionRange::new(2, 5), PositionRange::new(8, 9)],
        };
        assert!(seg.check(9).is_ok());
        assert!(seg.check(8).is_err());
        let overlapping = SegmentMap {
            visual: vec![PositionRange::new(0, 2), PositionRange::new(5, 8)],
            instruction: vec![PositionRange::new(2, 4), PositionRange::new(7, 9)],
        };
        assert!(overlapping.check(9).is_err());
    }
}
