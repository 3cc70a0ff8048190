// SPDX-License-Identifier: Apache-2.0

//! Area under the ROC curve via the Mann–Whitney U statistic.

use crate::error::{Error, Result};

/// Fraction of (positive, negative) pairs ranked correctly, with half credit
/// for tied scores.
///
/// The statistic is accumulated in integer half-units over a single sorted
/// sweep, so the result is the exact pair fraction rounded once.
///
/// ```
/// let a = verigate::analysis::auroc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap();
/// assert_eq!(a, 0.75);
/// ```
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::invalid("score", format!("{s}")));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass { positives, negatives });
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the U statistic: 2 per pair won, 1 per tie
    let mut twice_u: u128 = 0;
    let mut negatives_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        let mut group_pos: u128 = 0;
        let mut group_neg: u128 = 0;
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] {
                group_pos += 1;
            } else {
                group_neg += 1;
            }
            i += 1;
        }
        twice_u += 2 * group_pos * negatives_below + group_pos * group_neg;
        negatives_below += group_neg;
    }
    Ok(twice_u as f64 / (2 * positives as u128 * negatives as u128) as f64)
}
