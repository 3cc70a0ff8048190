// SPDX-License-Identifier: Apache-2.0

//! Upper bound on what any router could achieve.

use serde::{Deserialize, Serialize};

use crate::analysis::metrics::condition_metrics;
use crate::analysis::outcome::routed_metrics;
use crate::error::Result;
use crate::trace::{Condition, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCeiling {
    pub n: usize,
    pub baseline_f1: f64,
    /// F1 when exactly the fix set is routed.
    pub f1: f64,
    pub delta_f1: f64,
    pub n_prompted: usize,
    /// `100 * n_prompted / n`.
    pub prompt_pct: f64,
}

/// Routes a sample to `prompted` iff that turns a wrong baseline answer into a
/// correct one.
///
/// The result dominates every threshold policy on the same data, except that
/// a prompted answer which is unparseable can lower the false-positive count
/// of a no-truth sample without being correct.
pub fn oracle_ceiling(ds: &Dataset, prompted: Condition) -> Result<OracleCeiling> {
    let mask: Vec<bool> = ds
        .records()
        .iter()
        .map(|r| Ok(!r.is_correct(Condition::Baseline)? && r.is_correct(prompted)?))
        .collect::<Result<_>>()?;
    let baseline_f1 = condition_metrics(ds, Condition::Baseline)?.f1;
    let f1 = routed_metrics(ds, prompted, &mask)?.f1;
    let n_prompted = mask.iter().filter(|&&m| m).count();
    Ok(OracleCeiling {
        n: ds.len(),
        baseline_f1,
        f1,
        delta_f1: f1 - baseline_f1,
        n_prompted,
        prompt_pct: 100.0 * n_prompted as f64 / ds.len() as f64,
    })
}
