use serde::{Deserialize, Serialize};

use super::EvalError;

/// ROC curve from a descending threshold sweep, starting at `(0, 0)` and
/// ending at `(1, 1)`. Points are `(false positive rate, true positive rate)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    /// Mann–Whitney estimate of `P(score_pos > score_neg)`, ties counted ½.
    pub auc: f64,
}

impl RocCurve {
    /// Trapezoidal area under [`RocCurve::points`].
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }
}

fn check(pos: &[f64], neg: &[f64]) -> Result<(), EvalError> {
    if pos.is_empty() {
        return Err(EvalError::EmptyScores("positive"));
    }
    if neg.is_empty() {
        return Err(EvalError::EmptyScores("negative"));
    }
    match pos.iter().chain(neg).find(|s| !s.is_finite()) {
        Some(&s) => Err(EvalError::NonFiniteScore(s)),
        None => Ok(()),
    }
}

fn sorted(s: &[f64]) -> Vec<f64> {
    let mut v = s.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `(#{p > n} + ½ #{p = n}) / (|pos| |neg|)`, counted exactly.
pub fn mann_whitney_auc(pos: &[f64], neg: &[f64]) -> Result<f64, EvalError> {
    check(pos, neg)?;
    let neg = sorted(neg);
    let (mut greater, mut ties) = (0u128, 0u128);
    for &p in pos {
        let below = neg.partition_point(|&n| n < p);
        let not_above = neg.partition_point(|&n| n <= p);
        greater += below as u128;
        ties += (not_above - below) as u128;
    }
    let total = pos.len() as f64 * neg.len() as f64;
    Ok((greater as f64 + ties as f64 / 2.0) / total)
}

pub fn roc_auc(pos: &[f64], neg: &[f64]) -> Result<RocCurve, EvalError> {
    let auc = mann_whitney_auc(pos, neg)?;
    let (pos, neg) = (sorted(pos), sorted(neg));
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut i, mut j) = (pos.len(), neg.len());
    // sweep thresholds from the largest score down; tied scores move together
    while i > 0 || j > 0 {
        let t = match (i, j) {
            (0, _) => neg[j - 1],
            (_, 0) => pos[i - 1],
            _ => pos[i - 1].max(neg[j - 1]),
        };
        while i > 0 && pos[i - 1] == t {
            i -= 1;
        }
        while j > 0 && neg[j - 1] == t {
            j -= 1;
        }
        points.push(((neg.len() - j) as f64 / nn, (pos.len() - i) as f64 / np));
    }
    Ok(RocCurve { points, auc })
}
