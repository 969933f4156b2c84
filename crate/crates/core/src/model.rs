//! Validated grade data structures.
//!
//! A [`GradeMatrix`] is indexed `(gradee, grader)`: entry `(i, j)` is the
//! normalized grade that agent `j` gave to the work of agent `i`. Rows are
//! the grades an agent *received*, columns the grades an agent *gave*.

use serde::{Deserialize, Serialize};

use crate::error::{PeerRankError, Result};

/// Square matrix of peer grades in `[0, 1]`, with an optional presence mask
/// for subset grading.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeMatrix {
    m: usize,
    entries: Vec<f64>,
    /// `entries` transposed, so a grader's given grades are contiguous.
    columns: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl GradeMatrix {
    /// Validates a raw row-major array of grades.
    ///
    /// Entries of absent cells (mask `false`) are not checked and are stored
    /// as `0.0`. A mask that marks every cell present is dropped, so the
    /// result is in full mode.
    pub fn new(raw: Vec<Vec<f64>>, mask: Option<Vec<Vec<bool>>>) -> Result<Self> {
        let m = raw.len();
        if m == 0 {
            return Err(PeerRankError::Empty);
        }
        for (row, r) in raw.iter().enumerate() {
            if r.len() != m {
                return Err(PeerRankError::NotSquare {
                    row,
                    found: r.len(),
                    expected: m,
                });
            }
        }

        let mask = match mask {
            Some(mask) => {
                if mask.len() != m {
                    return Err(PeerRankError::MaskShape {
                        row: mask.len().min(m),
                        found: 0,
                        expected: m,
                    });
                }
                for (row, r) in mask.iter().enumerate() {
                    if r.len() != m {
                        return Err(PeerRankError::MaskShape {
                            row,
                            found: r.len(),
                            expected: m,
                        });
                    }
                }
                let flat: Vec<bool> = mask.into_iter().flatten().collect();
                if flat.iter().all(|&p| p) {
                    None
                } else {
                    Some(flat)
                }
            }
            None => None,
        };

        let mut entries = Vec::with_capacity(m * m);
        for (row, r) in raw.into_iter().enumerate() {
            for (col, value) in r.into_iter().enumerate() {
                let present = mask.as_ref().is_none_or(|mk| mk[row * m + col]);
                if !present {
                    entries.push(0.0);
                    continue;
                }
                if !(0.0..=1.0).contains(&value) {
                    return Err(PeerRankError::OutOfRange { row, col, value });
                }
                entries.push(value);
            }
        }

        if let Some(mk) = &mask {
            for agent in 0..m {
                if !mk[agent * m..(agent + 1) * m].iter().any(|&p| p) {
                    return Err(PeerRankError::NoGraders { agent });
                }
            }
        }

        let columns = (0..m * m).map(|k| entries[(k % m) * m + k / m]).collect();
        Ok(GradeMatrix {
            m,
            entries,
            columns,
            mask,
        })
    }

    /// Full-mode matrix from a row-major flat array.
    pub fn from_flat(m: usize, flat: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(PeerRankError::Empty);
        }
        if flat.len() != m * m {
            return Err(PeerRankError::DimensionMismatch {
                expected: m * m,
                found: flat.len(),
            });
        }
        let rows = flat.chunks(m).map(<[f64]>::to_vec).collect();
        GradeMatrix::new(rows, None)
    }

    /// Every agent gives every agent the grade `k`.
    pub fn unanimous(m: usize, k: f64) -> Result<Self> {
        GradeMatrix::from_flat(m, vec![k; m * m])
    }

    /// Every agent gives themselves 1 and everyone else 0.
    pub fn identity(m: usize) -> Result<Self> {
        GradeMatrix::from_fn(m, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let rows = (0..m).map(|i| (0..m).map(|j| f(i, j)).collect()).collect();
        GradeMatrix::new(rows, None)
    }

    /// Number of agents.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_masked(&self) -> bool {
        self.mask.is_some()
    }

    /// Grade given by `grader` to `gradee`; `0.0` for absent cells.
    #[inline]
    pub fn get(&self, gradee: usize, grader: usize) -> f64 {
        self.entries[gradee * self.m + grader]
    }

    #[inline]
    pub fn is_present(&self, gradee: usize, grader: usize) -> bool {
        self.mask.as_ref().is_none_or(|mk| mk[gradee * self.m + grader])
    }

    /// Grades received by `gradee`, absent cells as `0.0`.
    #[inline]
    pub fn row(&self, gradee: usize) -> &[f64] {
        &self.entries[gradee * self.m..(gradee + 1) * self.m]
    }

    /// Row-major grades, absent cells as `0.0`.
    #[inline]
    pub(crate) fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Grades given by `grader`, indexed by gradee; absent cells as `0.0`.
    #[inline]
    pub fn column(&self, grader: usize) -> &[f64] {
        &self.columns[grader * self.m..(grader + 1) * self.m]
    }

    pub(crate) fn mask_row(&self, gradee: usize) -> Option<&[bool]> {
        self.mask
            .as_deref()
            .map(|mk| &mk[gradee * self.m..(gradee + 1) * self.m])
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    pub fn mask_rows(&self) -> Option<Vec<Vec<bool>>> {
        self.mask
            .as_ref()
            .map(|mk| mk.chunks(self.m).map(<[bool]>::to_vec).collect())
    }

    /// Relabels agents: new agent `k` is old agent `perm[k]`. Rows, columns and
    /// the mask move together.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.m)?;
        let rows = (0..self.m)
            .map(|i| (0..self.m).map(|j| self.get(perm[i], perm[j])).collect())
            .collect();
        let mask = self.mask.as_ref().map(|_| {
            (0..self.m)
                .map(|i| (0..self.m).map(|j| self.is_present(perm[i], perm[j])).collect())
                .collect()
        });
        GradeMatrix::new(rows, mask)
    }

    /// Swaps agents `p` and `q`: their rows and their columns.
    pub fn swapped(&self, p: usize, q: usize) -> Result<Self> {
        for index in [p, q] {
            if index >= self.m {
                return Err(PeerRankError::AgentOutOfRange { index, m: self.m });
            }
        }
        let mut perm: Vec<usize> = (0..self.m).collect();
        perm.swap(p, q);
        self.permuted(&perm)
    }

    /// Dense product `A·x`, ignoring the mask.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.m {
            return Err(PeerRankError::DimensionMismatch {
                expected: self.m,
                found: x.len(),
            });
        }
        Ok((0..self.m)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

fn check_permutation(perm: &[usize], m: usize) -> Result<()> {
    if perm.len() != m {
        return Err(PeerRankError::DimensionMismatch {
            expected: m,
            found: perm.len(),
        });
    }
    let mut seen = vec![false; m];
    for &p in perm {
        if p >= m || seen[p] {
            return Err(PeerRankError::param("perm", "not a permutation of 0..m"));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Grades in `[0, 1]`, one per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GradeVector(Vec<f64>);

impl GradeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(PeerRankError::GradeOutOfRange { index, value });
            }
        }
        Ok(GradeVector(values))
    }

    /// Caller guarantees every value is in `[0, 1]`.
    pub(crate) fn from_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        GradeVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.0.len())?;
        Ok(GradeVector(perm.iter().map(|&p| self.0[p]).collect()))
    }
}

impl std::ops::Index<usize> for GradeVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl AsRef<[f64]> for GradeVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Mixing weights and stopping rule for the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeerRankParams {
    /// Weight of the grader-weighted average of received grades.
    pub alpha: f64,
    /// Weight of the accuracy credit; ignored by the basic rule.
    pub beta: f64,
    /// Stop once successive iterates differ by at most this much (max norm).
    pub epsilon: f64,
    pub max_iters: usize,
    /// Below this total grade the weighted average falls back to the plain
    /// row mean.
    pub zero_weight_delta: f64,
}

impl Default for PeerRankParams {
    fn default() -> Self {
        PeerRankParams {
            alpha: 0.1,
            beta: 0.1,
            epsilon: 1e-10,
            max_iters: 10_000,
            zero_weight_delta: 1e-12,
        }
    }
}

impl PeerRankParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let params = PeerRankParams {
            alpha,
            beta,
            ..Default::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(PeerRankError::param(
                "alpha",
                format!("{} is not in (0, 1)", self.alpha),
            ));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(PeerRankError::param("beta", format!("{} is negative", self.beta)));
        }
        // alpha + beta may round a hair above 1 for decimal inputs like 0.7 + 0.3.
        if self.alpha + self.beta > 1.0 + 1e-12 {
            return Err(PeerRankError::param(
                "beta",
                format!("alpha + beta = {} exceeds 1", self.alpha + self.beta),
            ));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(PeerRankError::param("epsilon", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(PeerRankError::param("max_iters", "must be at least 1"));
        }
        if self.zero_weight_delta.is_nan() || self.zero_weight_delta < 0.0 {
            return Err(PeerRankError::param("zero_weight_delta", "must be non-negative"));
        }
        Ok(())
    }
}

/// Outcome of a fixed-point solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub grades: GradeVector,
    /// Number of update steps applied.
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    /// Residual after each step, in order.
    pub residual_history: Vec<f64>,
}

/// Initial grades: the mean of the grades each agent received.
pub fn initial_grades(matrix: &GradeMatrix) -> GradeVector {
    GradeVector::from_unchecked((0..matrix.m()).map(|i| row_mean(matrix, i)).collect())
}

/// The AVERAGE baseline: each agent's mean received peer grade.
pub fn average_rule(matrix: &GradeMatrix) -> GradeVector {
    initial_grades(matrix)
}

/// Mean of the present grades in a row.
pub(crate) fn row_mean(matrix: &GradeMatrix, gradee: usize) -> f64 {
    let row = matrix.row(gradee);
    let mean = match matrix.mask_row(gradee) {
        None => row.iter().sum::<f64>() / row.len() as f64,
        Some(mask) => {
            let (sum, count) = row
                .iter()
                .zip(mask)
                .filter(|(_, &p)| p)
                .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
            sum / count as f64
        }
    };
    mean.clamp(0.0, 1.0)
}
