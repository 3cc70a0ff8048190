// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

use crate::trace::Condition;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed, inconsistent or incomplete input.
    Input,
    /// Input was valid but the requested analysis is undefined on it.
    Analysis,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: unsupported schema '{found}' (expected major version 1 of 'verigate')")]
    SchemaVersion { line: usize, found: String },

    #[error("{}sample '{sample_id}' violates {invariant} invariant: {detail}", line_prefix(*.line))]
    Invariant {
        line: Option<usize>,
        sample_id: String,
        invariant: &'static str,
        detail: String,
    },

    #[error("{}trace references unknown sample_id '{sample_id}'", line_prefix(*.line))]
    DanglingTrace { line: Option<usize>, sample_id: String },

    #[error("{}duplicate sample_id '{sample_id}'", line_prefix(*.line))]
    DuplicateSample { line: Option<usize>, sample_id: String },

    #[error("{}duplicate trace for sample '{sample_id}' under {condition}", line_prefix(*.line))]
    DuplicateTrace {
        line: Option<usize>,
        sample_id: String,
        condition: Condition,
    },

    #[error("no records")]
    NoRecords,

    #[error("sample '{sample_id}' has no {condition} outcome")]
    MissingOutcome {
        sample_id: String,
        condition: Condition,
    },

    #[error("sample '{sample_id}' has no {condition} trace")]
    MissingTrace {
        sample_id: String,
        condition: Condition,
    },

    #[error("{} sample(s) missing required condition traces: {}", .sample_ids.len(), id_list(.sample_ids))]
    IncompleteConditions { sample_ids: Vec<String> },

    #[error("invalid {what}: {detail}")]
    InvalidArgument { what: &'static str, detail: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("AUROC undefined: labels contain a single class ({positives} positive, {negatives} negative)")]
    SingleClass { positives: usize, negatives: usize },

    #[error("baseline attention entropy is zero for sample '{sample_id}' at layer {layer}; percent change undefined")]
    ZeroBaselineEntropy { sample_id: String, layer: usize },

    #[error("infeasible synthetic configuration: {0}")]
    InfeasibleConfig(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn id_list(ids: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut out = ids.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if ids.len() > SHOWN {
        out.push_str(&format!(", ... ({} more)", ids.len() - SHOWN));
    }
    out
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SingleClass { .. } | Error::ZeroBaselineEntropy { .. } => ErrorClass::Analysis,
            _ => ErrorClass::Input,
        }
    }

    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidArgument {
            what,
            detail: detail.into(),
        }
    }
}
