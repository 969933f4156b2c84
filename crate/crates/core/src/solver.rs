//! PeerRank fixed-point iteration.
//!
//! Each step mixes an agent's current grade with the average of the grades it
//! received, weighted by the current grades of the graders:
//!
//! ```text
//! x'[i] = (1 - α - β)·x[i] + α·Σ_j x[j]·A[i][j] / Σ_j x[j] + β·credit(i)
//! ```
//!
//! where `credit(i) = mean_j (1 - |A[j][i] - x[j]|)` rewards agent `i` for
//! grading others close to their current grades. The basic rule is the
//! special case `β = 0`. At a fixed point of the basic rule `A·x = (Σx)·x`,
//! so the grades form an eigenvector of the grade matrix.

use serde::{Deserialize, Serialize};

use crate::error::{PeerRankError, Result};
use crate::model::{initial_grades, row_mean, GradeMatrix, GradeVector, PeerRankParams, SolveReport};

/// Which update rule to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    /// Weighted-average rule only; `params.beta` is ignored.
    Basic,
    /// Weighted average plus the accuracy credit.
    Generalized,
}

impl StepKind {
    fn beta(self, params: &PeerRankParams) -> f64 {
        match self {
            StepKind::Basic => 0.0,
            StepKind::Generalized => params.beta,
        }
    }
}

/// One update of the basic rule.
pub fn step_basic(
    matrix: &GradeMatrix,
    grades: &GradeVector,
    alpha: f64,
    zero_weight_delta: f64,
) -> Result<GradeVector> {
    check_len(matrix, grades)?;
    check_mix(alpha, 0.0)?;
    let mut out = vec![0.0; matrix.m()];
    update_into(matrix, grades.as_slice(), alpha, 0.0, zero_weight_delta, &mut out);
    Ok(GradeVector::from_unchecked(out))
}

/// One update of the generalized rule.
pub fn step_generalized(
    matrix: &GradeMatrix,
    grades: &GradeVector,
    alpha: f64,
    beta: f64,
    zero_weight_delta: f64,
) -> Result<GradeVector> {
    check_len(matrix, grades)?;
    check_mix(alpha, beta)?;
    let mut out = vec![0.0; matrix.m()];
    update_into(matrix, grades.as_slice(), alpha, beta, zero_weight_delta, &mut out);
    Ok(GradeVector::from_unchecked(out))
}

/// How closely `grader`'s given grades match the current grades of the
/// agents they graded: 1 for exact, 0 when every grade is off by 1.
pub fn accuracy_credit(matrix: &GradeMatrix, grades: &GradeVector, grader: usize) -> Result<f64> {
    check_len(matrix, grades)?;
    if grader >= matrix.m() {
        return Err(PeerRankError::AgentOutOfRange {
            index: grader,
            m: matrix.m(),
        });
    }
    Ok(credit(matrix, grades.as_slice(), grader))
}

/// Max-norm distance between two grade vectors.
pub fn residual(x: &GradeVector, y: &GradeVector) -> Result<f64> {
    if x.len() != y.len() {
        return Err(PeerRankError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(max_abs_diff(x.as_slice(), y.as_slice()))
}

/// Result of [`verify_eigenvector`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenCheck {
    pub is_eigenvector: bool,
    /// `‖A·x − (Σx)·x‖∞`
    pub max_defect: f64,
}

/// Checks that `grades` is an eigenvector of `matrix` with eigenvalue `Σ grades`.
pub fn verify_eigenvector(matrix: &GradeMatrix, grades: &GradeVector, tol: f64) -> Result<EigenCheck> {
    check_len(matrix, grades)?;
    if matrix.is_masked() {
        return Err(PeerRankError::MaskedMatrix);
    }
    if grades.as_slice().iter().all(|&x| x == 0.0) {
        return Err(PeerRankError::ZeroVector);
    }
    let lambda = grades.sum();
    let ax = matrix.mul_vec(grades.as_slice())?;
    let max_defect = ax
        .iter()
        .zip(grades.as_slice())
        .map(|(a, x)| (a - lambda * x).abs())
        .fold(0.0, f64::max);
    Ok(EigenCheck {
        is_eigenvector: max_defect <= tol,
        max_defect,
    })
}

/// Iterates the chosen rule until successive iterates are within
/// `params.epsilon` or `params.max_iters` steps have been taken.
///
/// The default seed is the vector of row means. Running out of iterations is
/// reported through [`SolveReport::converged`], not as an error.
pub fn solve(
    matrix: &GradeMatrix,
    params: &PeerRankParams,
    kind: StepKind,
    seed: Option<&GradeVector>,
) -> Result<SolveReport> {
    let mut iteration = FixedPointIteration::new(matrix, params, kind, seed)?;
    let mut residual_history = Vec::new();
    let mut converged = false;
    while iteration.steps() < params.max_iters {
        let r = iteration.advance();
        residual_history.push(r);
        if r <= params.epsilon {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        iterations: iteration.steps(),
        converged,
        final_residual: residual_history.last().copied().unwrap_or(f64::INFINITY),
        residual_history,
        grades: iteration.into_grades(),
    })
}

/// Step-by-step driver over the iterates of a rule, for callers that want to
/// inspect every intermediate grade vector.
#[derive(Debug, Clone)]
pub struct FixedPointIteration<'a> {
    matrix: &'a GradeMatrix,
    alpha: f64,
    beta: f64,
    zero_weight_delta: f64,
    current: Vec<f64>,
    scratch: Vec<f64>,
    steps: usize,
}

impl<'a> FixedPointIteration<'a> {
    pub fn new(
        matrix: &'a GradeMatrix,
        params: &PeerRankParams,
        kind: StepKind,
        seed: Option<&GradeVector>,
    ) -> Result<Self> {
        params.validate()?;
        let current = match seed {
            Some(seed) => {
                check_len(matrix, seed)?;
                seed.as_slice().to_vec()
            }
            None => initial_grades(matrix).into_inner(),
        };
        Ok(FixedPointIteration {
            matrix,
            alpha: params.alpha,
            beta: kind.beta(params),
            zero_weight_delta: params.zero_weight_delta,
            scratch: vec![0.0; current.len()],
            current,
            steps: 0,
        })
    }

    /// Current iterate; the seed before the first step.
    #[inline]
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    /// Iterate before the last step; equal to [`current`](Self::current)
    /// before the first step.
    #[inline]
    pub fn previous(&self) -> &[f64] {
        if self.steps == 0 {
            &self.current
        } else {
            &self.scratch
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Applies one update and returns the max-norm change.
    #[inline]
    pub fn advance(&mut self) -> f64 {
        update_into(
            self.matrix,
            &self.current,
            self.alpha,
            self.beta,
            self.zero_weight_delta,
            &mut self.scratch,
        );
        std::mem::swap(&mut self.current, &mut self.scratch);
        self.steps += 1;
        max_abs_diff(&self.current, &self.scratch)
    }

    pub fn into_grades(self) -> GradeVector {
        GradeVector::from_unchecked(self.current)
    }
}

fn check_len(matrix: &GradeMatrix, grades: &GradeVector) -> Result<()> {
    if grades.len() != matrix.m() {
        return Err(PeerRankError::DimensionMismatch {
            expected: matrix.m(),
            found: grades.len(),
        });
    }
    Ok(())
}

fn check_mix(alpha: f64, beta: f64) -> Result<()> {
    PeerRankParams {
        alpha,
        beta,
        ..Default::default()
    }
    .validate()
}

#[inline]
fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    let mut worst = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = (a - b).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Shared update for both rules. With `beta == 0` the credit term is skipped
/// entirely, so the basic and generalized paths agree bit for bit.
#[inline]
fn update_into(matrix: &GradeMatrix, x: &[f64], alpha: f64, beta: f64, zero_weight_delta: f64, out: &mut [f64]) {
    let inertia = 1.0 - alpha - beta;
    let total: f64 = x.iter().sum();
    if beta == 0.0 && !matrix.is_masked() && total >= zero_weight_delta {
        // Hot path of the basic rule on a full matrix.
        let rows = matrix.entries().chunks_exact(x.len());
        for ((slot, row), &xi) in out.iter_mut().zip(rows).zip(x) {
            let num: f64 = row.iter().zip(x).map(|(a, w)| a * w).sum();
            let v = inertia * xi + alpha * (num / total).min(1.0);
            *slot = v.clamp(0.0, 1.0);
        }
        return;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        let weighted = weighted_average(matrix, x, i, total, zero_weight_delta);
        let mut v = inertia * x[i] + alpha * weighted;
        if beta != 0.0 {
            v += beta * credit(matrix, x, i);
        }
        // A convex combination of values in [0, 1] can round one ulp past 1.
        debug_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "iterate {v} left [0, 1]");
        *slot = v.clamp(0.0, 1.0);
    }
}

fn weighted_average(matrix: &GradeMatrix, x: &[f64], gradee: usize, total: f64, delta: f64) -> f64 {
    let row = matrix.row(gradee);
    let (num, den) = match matrix.mask_row(gradee) {
        None => (row.iter().zip(x).map(|(a, w)| a * w).sum::<f64>(), total),
        Some(mask) => row
            .iter()
            .zip(x)
            .zip(mask)
            .filter(|(_, &p)| p)
            .fold((0.0, 0.0), |(n, d), ((a, w), _)| (n + a * w, d + w)),
    };
    if den < delta {
        row_mean(matrix, gradee)
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// Mean of `1 - |A[j][grader] - x[j]|` over the agents `grader` graded.
/// An agent who graded nobody earns no credit.
fn credit(matrix: &GradeMatrix, x: &[f64], grader: usize) -> f64 {
    let given = matrix.column(grader);
    let (sum, count) = (0..matrix.m())
        .filter(|&j| matrix.is_present(j, grader))
        .fold((0.0, 0usize), |(s, c), j| (s + (1.0 - (given[j] - x[j]).abs()), c + 1));
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).clamp(0.0, 1.0)
    }
}
