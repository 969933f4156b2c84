use serde::{Deserialize, Serialize};

use crate::error::{PeerRankError, Result};
use crate::model::GradeVector;

/// Errors of both rules on one synthetic cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub rmse_peerrank_pct: f64,
    pub rmse_average_pct: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Root-mean-square error of predicted grades against true marks, in marks
/// out of 100. Predictions are compared unrounded.
pub fn rmse_percent(predicted: &GradeVector, true_marks: &[u32]) -> Result<f64> {
    if predicted.len() != true_marks.len() {
        return Err(PeerRankError::DimensionMismatch {
            expected: true_marks.len(),
            found: predicted.len(),
        });
    }
    if true_marks.is_empty() {
        return Err(PeerRankError::Empty);
    }
    let sum_sq: f64 = predicted
        .as_slice()
        .iter()
        .zip(true_marks)
        .map(|(&x, &t)| {
            let d = 100.0 * x - t as f64;
            d * d
        })
        .sum();
    Ok((sum_sq / true_marks.len() as f64).sqrt())
}
