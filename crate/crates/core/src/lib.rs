// SPDX-License-Identifier: Apache-2.0

//! Selective verification prompting driven by pre-generation uncertainty.
//!
//! A vision-language model answers a yes/no question either with its plain
//! prompt or with a verification prompt that asks it to check the image
//! first. Always verifying fixes some answers and breaks others. This crate
//! works from serialized model traces to decide, per input, whether the
//! verification prompt is worth invoking, and to measure what that decision
//! buys.
//!
//! * [`trace`]: the line-delimited dataset format and its validation.
//! * [`signals`]: attention entropy, segment masses, inverse top-1 confidence.
//! * [`routing`]: the threshold rule `u > τ` and its calibration on a dev set.
//! * [`analysis`]: fix/break counts, metrics, AUROC, paired bootstrap, oracle
//!   ceiling, layer and trigger-rate sweeps, the three-condition attention report.
//! * [`synth`]: a seeded generator with planted ground truth.
//! * [`report`]: JSON documents and aligned text tables for every analysis.
//!
//! ```
//! use verigate::{analysis, routing, signals::SignalSpec, synth};
//!
//! let ds = synth::generate(&synth::SynthConfig { n_samples: 200, ..Default::default() }).unwrap();
//! let policy = routing::calibrate(&ds, SignalSpec::entropy(2), &[0.05, 0.1, 0.2], Default::default()).unwrap();
//! let run = routing::apply_policy(&ds, &policy).unwrap();
//! assert!(run.realized_rate <= 0.2 + 1.0 / 200.0);
//! let table = analysis::fix_break_table(&ds, verigate::trace::Condition::Verification).unwrap();
//! assert_eq!(table.net, table.fixes as i64 - table.breaks as i64);
//! ```

pub mod analysis;
pub mod error;
pub mod json;
pub mod report;
pub mod rng;
pub mod routing;
pub mod signals;
pub mod stats;
pub mod synth;
pub mod trace;

pub use error::{Error, ErrorClass, Result};
pub use trace::{load_dataset, Answer, Condition, Dataset, GroundTruth, PrefillTrace, SampleRecord};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/format.md")]
    pub mod format {}
    #[doc = include_str!("../../../book/src/signals.md")]
    pub mod signals {}
    #[doc = include_str!("../../../book/src/routing.md")]
    pub mod routing {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    pub mod analysis {}
    #[doc = include_str!("../../../book/src/synth.md")]
    pub mod synth {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
