//! Monte Carlo comparison of generalized PeerRank against the AVERAGE
//! baseline on synthetic cohorts, plus one-parameter sweeps.
//!
//! Trial `k` of every sweep point draws from the stream seeded by
//! `derive_seed(base_seed, k)`, so points share random numbers and a sweep
//! with one value reproduces the matching single-point run exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PeerRankError, Result};
use crate::metrics::{rmse_percent, TrialResult};
use crate::model::{average_rule, PeerRankParams};
use crate::solver::{solve, StepKind};
use crate::synth::{build_grade_matrix, derive_seed, rng_from_seed, sample_true_marks, MarkDistribution, MarkingModel};

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SEED: u64 = 20_150_317;
/// Mean mark used by the normal sweep when the base config is not normal.
pub const DEFAULT_NORMAL_MEAN: f64 = 70.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Group size.
    pub m: usize,
    pub dist: MarkDistribution,
    pub model: MarkingModel,
    pub bias_r: f64,
    pub params: PeerRankParams,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 10,
            dist: MarkDistribution::Binomial { p: 0.7 },
            model: MarkingModel::default(),
            bias_r: 1.0,
            params: PeerRankParams::default(),
            trials: DEFAULT_TRIALS,
            base_seed: DEFAULT_SEED,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(PeerRankError::param("m", format!("group size {} is below 2", self.m)));
        }
        if self.trials == 0 {
            return Err(PeerRankError::param("trials", "must be at least 1"));
        }
        if !(self.bias_r > 0.0 && self.bias_r.is_finite()) {
            return Err(PeerRankError::param(
                "bias_r",
                format!("{} is not a positive number", self.bias_r),
            ));
        }
        self.dist.validate()?;
        self.model.validate()?;
        self.params.validate()
    }
}

/// One plotted point: means over `trials` trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub swept_value: f64,
    #[serde(rename = "rmse_peerrank_pct")]
    pub mean_rmse_peerrank_pct: f64,
    #[serde(rename = "rmse_average_pct")]
    pub mean_rmse_average_pct: f64,
    pub trials: usize,
    pub nonconverged: usize,
}

/// Runs one synthetic cohort: sample marks, simulate grading, and score both
/// rules.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialResult> {
    config.validate()?;
    run_trial_unchecked(config, trial_index)
}

fn run_trial_unchecked(config: &ExperimentConfig, trial_index: usize) -> Result<TrialResult> {
    let mut rng = rng_from_seed(derive_seed(config.base_seed, trial_index as u64));
    let marks = sample_true_marks(&config.dist, config.m, &mut rng)?;
    let matrix = build_grade_matrix(&marks, &config.model, config.bias_r, &mut rng)?;
    let report = solve(&matrix, &config.params, StepKind::Generalized, None)?;
    let baseline = average_rule(&matrix);
    Ok(TrialResult {
        rmse_peerrank_pct: rmse_percent(&report.grades, &marks)?,
        rmse_average_pct: rmse_percent(&baseline, &marks)?,
        converged: report.converged,
        iterations: report.iterations,
    })
}

/// All trials of `config`, in trial-index order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    config.validate()?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.trials)
            .into_par_iter()
            .map(|k| run_trial_unchecked(config, k))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.trials).map(|k| run_trial_unchecked(config, k)).collect()
    }
}

/// Averages all trials of `config` into one row.
pub fn run_point(config: &ExperimentConfig, swept_value: f64) -> Result<SweepRow> {
    let results = run_trials(config)?;
    let n = results.len() as f64;
    // Sequential sums in trial order keep the means bit-identical however the
    // trials were scheduled.
    let mut pr = 0.0;
    let mut avg = 0.0;
    let mut nonconverged = 0;
    for r in &results {
        pr += r.rmse_peerrank_pct;
        avg += r.rmse_average_pct;
        nonconverged += usize::from(!r.converged);
    }
    Ok(SweepRow {
        swept_value,
        mean_rmse_peerrank_pct: pr / n,
        mean_rmse_average_pct: avg / n,
        trials: results.len(),
        nonconverged,
    })
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Success probability of binomial true marks.
    BinomialP,
    /// Standard deviation of normal true marks.
    NormalSd,
    /// Lower bound of uniform true marks on `[lo, 100]`.
    UniformLo,
    /// Bias factor applied to every peer grade.
    Bias,
    /// Number of agents.
    GroupSize,
}

impl SweepKind {
    pub const ALL: [SweepKind; 5] = [
        SweepKind::BinomialP,
        SweepKind::NormalSd,
        SweepKind::UniformLo,
        SweepKind::Bias,
        SweepKind::GroupSize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::BinomialP => "binomial-p",
            SweepKind::NormalSd => "normal-sd",
            SweepKind::UniformLo => "uniform-lo",
            SweepKind::Bias => "bias",
            SweepKind::GroupSize => "group-size",
        }
    }

    /// Config for one swept value.
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut config = *base;
        match self {
            SweepKind::BinomialP => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(PeerRankError::param("p", format!("{value} is not in [0, 1]")));
                }
                config.dist = MarkDistribution::Binomial { p: value };
            }
            SweepKind::NormalSd => {
                let mean = match base.dist {
                    MarkDistribution::Normal { mean, .. } => mean,
                    _ => DEFAULT_NORMAL_MEAN,
                };
                config.dist = MarkDistribution::Normal { mean, sd: value };
            }
            SweepKind::UniformLo => {
                config.dist = MarkDistribution::uniform_from(whole_number("lo", value, 0, 100)? as u32);
            }
            SweepKind::Bias => config.bias_r = value,
            SweepKind::GroupSize => config.m = whole_number("m", value, 2, u32::MAX as u64)? as usize,
        }
        config.validate()?;
        Ok(config)
    }
}

impl FromStr for SweepKind {
    type Err = PeerRankError;

    fn from_str(s: &str) -> Result<Self> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PeerRankError::param("kind", format!("unknown sweep kind `{s}`")))
    }
}

fn whole_number(name: &'static str, value: f64, lo: u64, hi: u64) -> Result<u64> {
    if value.fract() != 0.0 || value < lo as f64 || value > hi as f64 {
        return Err(PeerRankError::param(
            name,
            format!("{value} is not a whole number in [{lo}, {hi}]"),
        ));
    }
    Ok(value as u64)
}

/// One row per value, in input order. Every value is validated before any
/// trial runs.
pub fn sweep(kind: SweepKind, values: &[f64], base: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(PeerRankError::param("values", "sweep needs at least one value"));
    }
    let configs = values
        .iter()
        .map(|&v| kind.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .iter()
        .zip(values)
        .map(|(config, &v)| run_point(config, v))
        .collect()
}

pub fn sweep_binomial_p(p_values: &[f64], config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    sweep(SweepKind::BinomialP, p_values, config)
}

pub fn sweep_normal_sd(sd_values: &[f64], config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    sweep(SweepKind::NormalSd, sd_values, config)
}

pub fn sweep_uniform_lo(lo_values: &[f64], config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    sweep(SweepKind::UniformLo, lo_values, config)
}

pub fn sweep_bias_r(r_values: &[f64], config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    sweep(SweepKind::Bias, r_values, config)
}

pub fn sweep_group_size(m_values: &[f64], config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    sweep(SweepKind::GroupSize, m_values, config)
}

pub const SWEEP_CSV_HEADER: &str = "swept_value,rmse_peerrank_pct,rmse_average_pct,trials,nonconverged";

/// CSV with a header row; floats use the shortest round-trip form.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.swept_value, r.mean_rmse_peerrank_pct, r.mean_rmse_average_pct, r.trials, r.nonconverged
        );
    }
    out
}

/// Pretty-printed JSON array of row objects keyed like the CSV columns.
pub fn sweep_to_json(rows: &[SweepRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("sweep rows always serialize");
    s.push('\n');
    s
}
