//! Synthetic cohorts: true marks out of 100, simulated peer grading out of
//! `questions`, and multiplicative grading bias.
//!
//! All randomness flows from a caller-supplied [`rand::Rng`]; use
//! [`rng_from_seed`] for the portable generator the experiments use.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{PeerRankError, Result};
use crate::model::GradeMatrix;

/// Highest true mark.
pub const MAX_MARK: u32 = 100;

/// Portable generator used by every experiment.
pub type ExperimentRng = Xoshiro256PlusPlus;

/// Xoshiro256++ seeded through SplitMix64; output is identical on every
/// platform for a given seed.
pub fn rng_from_seed(seed: u64) -> ExperimentRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Seed for trial `index` of an experiment with base seed `base`. Trials get
/// independent streams regardless of the order they run in.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Distribution of true marks over `0..=100`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkDistribution {
    /// Number of successes in 100 trials with probability `p`.
    Binomial { p: f64 },
    /// Rounded and clamped to `0..=100`.
    Normal { mean: f64, sd: f64 },
    /// Every integer mark in `lo..=hi` equally likely.
    Uniform { lo: u32, hi: u32 },
}

impl MarkDistribution {
    pub fn uniform_from(lo: u32) -> Self {
        MarkDistribution::Uniform { lo, hi: MAX_MARK }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MarkDistribution::Binomial { p } => check_probability("p", p),
            MarkDistribution::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(PeerRankError::param("mean", "must be finite"));
                }
                if !(sd >= 0.0 && sd.is_finite()) {
                    return Err(PeerRankError::param(
                        "sd",
                        format!("{sd} is not a finite non-negative number"),
                    ));
                }
                Ok(())
            }
            MarkDistribution::Uniform { lo, hi } => {
                if lo > hi || hi > MAX_MARK {
                    return Err(PeerRankError::param(
                        "lo",
                        format!("need 0 <= lo <= hi <= 100, got [{lo}, {hi}]"),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// How a grader's skill turns a true mark into a peer grade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkingKind {
    /// Each of the gradee's correct answers is marked correct with the
    /// grader's skill; each wrong answer is marked correct with one minus it.
    BinomialSum,
    /// Expected mark plus normal noise with sd `scale · (1 − skill)`.
    NormalNoise { scale: f64 },
    /// Uniform on `expected ± round(scale · (1 − skill))`.
    UniformNoise { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkingModel {
    pub kind: MarkingKind,
    /// Peer grades are integers in `0..=questions`.
    pub questions: u32,
}

impl Default for MarkingModel {
    fn default() -> Self {
        MarkingModel {
            kind: MarkingKind::BinomialSum,
            questions: 10,
        }
    }
}

impl MarkingModel {
    pub const DEFAULT_NOISE_SCALE: f64 = 2.0;

    pub fn validate(&self) -> Result<()> {
        if self.questions == 0 {
            return Err(PeerRankError::param("questions", "must be at least 1"));
        }
        match self.kind {
            MarkingKind::BinomialSum => Ok(()),
            MarkingKind::NormalNoise { scale } | MarkingKind::UniformNoise { scale } => {
                if scale >= 0.0 && scale.is_finite() {
                    Ok(())
                } else {
                    Err(PeerRankError::param(
                        "scale",
                        format!("{scale} is not a finite non-negative number"),
                    ))
                }
            }
        }
    }

    /// Number of questions an agent with `true_mark` gets right, rounded half up.
    pub fn expected_correct(&self, true_mark: u32) -> u32 {
        (self.questions * true_mark + MAX_MARK / 2) / MAX_MARK
    }
}

/// Draws `m` independent true marks.
pub fn sample_true_marks<R: Rng + ?Sized>(dist: &MarkDistribution, m: usize, rng: &mut R) -> Result<Vec<u32>> {
    dist.validate()?;
    if m == 0 {
        return Err(PeerRankError::param("m", "must be at least 1"));
    }
    let marks = match *dist {
        MarkDistribution::Binomial { p } => (0..m).map(|_| bernoulli_sum(MAX_MARK, p, rng)).collect(),
        MarkDistribution::Normal { mean, sd } => {
            if sd == 0.0 {
                vec![clamp_mark(mean.round(), MAX_MARK); m]
            } else {
                let normal = Normal::new(mean, sd).map_err(|e| PeerRankError::param("sd", e.to_string()))?;
                (0..m)
                    .map(|_| clamp_mark(normal.sample(rng).round(), MAX_MARK))
                    .collect()
            }
        }
        MarkDistribution::Uniform { lo, hi } => (0..m).map(|_| rng.random_range(lo..=hi)).collect(),
    };
    Ok(marks)
}

/// One peer grade in `0..=model.questions` for an agent with `true_mark`,
/// given by a grader whose skill is `grader_skill`.
pub fn peer_grade<R: Rng + ?Sized>(
    true_mark: u32,
    grader_skill: f64,
    model: &MarkingModel,
    rng: &mut R,
) -> Result<u32> {
    if true_mark > MAX_MARK {
        return Err(PeerRankError::param(
            "true_mark",
            format!("{true_mark} exceeds {MAX_MARK}"),
        ));
    }
    check_probability("grader_skill", grader_skill)?;
    model.validate()?;
    Ok(peer_grade_unchecked(true_mark, grader_skill, model, rng))
}

fn peer_grade_unchecked<R: Rng + ?Sized>(true_mark: u32, skill: f64, model: &MarkingModel, rng: &mut R) -> u32 {
    let q = model.questions;
    let correct = model.expected_correct(true_mark);
    match model.kind {
        MarkingKind::BinomialSum => bernoulli_sum(correct, skill, rng) + bernoulli_sum(q - correct, 1.0 - skill, rng),
        MarkingKind::NormalNoise { scale } => {
            let sd = scale * (1.0 - skill);
            if sd == 0.0 {
                correct
            } else {
                let noise = Normal::new(0.0, sd).expect("sd is finite and positive").sample(rng);
                clamp_mark((correct as f64 + noise).round(), q)
            }
        }
        MarkingKind::UniformNoise { scale } => {
            let width = (scale * (1.0 - skill)).round() as i64;
            let centre = correct as i64;
            let draw = rng.random_range(centre - width..=centre + width);
            draw.clamp(0, q as i64) as u32
        }
    }
}

/// Scales a peer grade by `r`, rounds half up and clamps to `0..=max`.
pub fn apply_bias(grade: u32, r: f64, max: u32) -> Result<u32> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(PeerRankError::param("r", format!("{r} is not a positive number")));
    }
    Ok(clamp_mark((r * grade as f64).round(), max))
}

/// Every agent grades every agent, themselves included. Grader skill is the
/// grader's own true mark over 100; grades are biased by `bias_r` and then
/// normalized by the number of questions.
pub fn build_grade_matrix<R: Rng + ?Sized>(
    true_marks: &[u32],
    model: &MarkingModel,
    bias_r: f64,
    rng: &mut R,
) -> Result<GradeMatrix> {
    model.validate()?;
    apply_bias(0, bias_r, model.questions)?;
    if let Some(&bad) = true_marks.iter().find(|&&t| t > MAX_MARK) {
        return Err(PeerRankError::param("true_mark", format!("{bad} exceeds {MAX_MARK}")));
    }
    let m = true_marks.len();
    let q = model.questions;
    let mut flat = Vec::with_capacity(m * m);
    for &gradee_mark in true_marks {
        for &grader_mark in true_marks {
            let skill = grader_mark as f64 / MAX_MARK as f64;
            let raw = peer_grade_unchecked(gradee_mark, skill, model, rng);
            let biased = clamp_mark((bias_r * raw as f64).round(), q);
            flat.push(biased as f64 / q as f64);
        }
    }
    GradeMatrix::from_flat(m, flat)
}

fn bernoulli_sum<R: Rng + ?Sized>(trials: u32, p: f64, rng: &mut R) -> u32 {
    (0..trials).filter(|_| rng.random::<f64>() < p).count() as u32
}

fn clamp_mark(x: f64, max: u32) -> u32 {
    x.clamp(0.0, max as f64) as u32
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(PeerRankError::param(name, format!("{p} is not in [0, 1]")))
    }
}
