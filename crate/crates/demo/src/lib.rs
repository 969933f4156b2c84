//! Browser bindings for the peerrank library. Every export takes plain
//! numbers and strings and returns a JSON string, so the page needs no
//! generated types. The same functions are tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use peerrank::experiments::{run_point, sweep_to_json, DEFAULT_SEED};
use peerrank::io::grade_matrix_from_csv;
use peerrank::{
    average_rule, solve, sweep, ExperimentConfig, FixedPointIteration, PeerRankParams, StepKind, SweepKind,
};

/// Iterates kept for the trajectory plot.
pub const TRAJECTORY_CAP: usize = 400;

#[derive(Serialize)]
struct SolveOutput {
    rule: StepKind,
    converged: bool,
    iterations: usize,
    final_residual: f64,
    peerrank: Vec<f64>,
    average: Vec<f64>,
    /// Seed followed by the first iterates, at most `TRAJECTORY_CAP + 1` vectors.
    trajectory: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct PointOutput {
    rmse_peerrank_pct: f64,
    rmse_average_pct: f64,
    trials: usize,
    nonconverged: usize,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output serializes")
}

fn params(alpha: f64, beta: f64) -> Result<PeerRankParams, String> {
    PeerRankParams::new(alpha, beta).map_err(|e| e.to_string())
}

/// Solves a grade matrix given as CSV (row i holds the grades agent i
/// received). An empty `mask_csv` means every grade was given. `beta` of
/// zero selects the basic rule.
#[wasm_bindgen(js_name = solveMatrix)]
pub fn solve_matrix(matrix_csv: &str, mask_csv: &str, alpha: f64, beta: f64) -> Result<String, String> {
    let mask = Some(mask_csv).filter(|m| !m.trim().is_empty());
    let matrix = grade_matrix_from_csv(matrix_csv, mask).map_err(|e| e.to_string())?;
    let params = params(alpha, beta)?;
    let kind = if beta == 0.0 {
        StepKind::Basic
    } else {
        StepKind::Generalized
    };
    let report = solve(&matrix, &params, kind, None).map_err(|e| e.to_string())?;

    let mut it = FixedPointIteration::new(&matrix, &params, kind, None).map_err(|e| e.to_string())?;
    let mut trajectory = vec![it.current().to_vec()];
    for _ in 0..report.iterations.min(TRAJECTORY_CAP) {
        it.advance();
        trajectory.push(it.current().to_vec());
    }

    Ok(to_json(&SolveOutput {
        rule: kind,
        converged: report.converged,
        iterations: report.iterations,
        final_residual: report.final_residual,
        peerrank: report.grades.into_inner(),
        average: average_rule(&matrix).into_inner(),
        trajectory,
    }))
}

fn experiment(m: usize, bias: f64, trials: usize, seed: u32) -> ExperimentConfig {
    ExperimentConfig {
        m,
        bias_r: bias,
        trials,
        base_seed: u64::from(seed),
        ..Default::default()
    }
}

fn kind(name: &str) -> Result<SweepKind, String> {
    name.parse().map_err(|e: peerrank::PeerRankError| e.to_string())
}

/// Runs `trials` synthetic cohorts with one parameter set to `value`.
/// `kind` names the parameter as in [`run_sweep`]; the rest keep the
/// defaults (binomial marks with p = 0.7, 10 questions, α = β = 0.1).
#[wasm_bindgen(js_name = simulatePoint)]
pub fn simulate_point(
    kind_name: &str,
    value: f64,
    m: usize,
    bias: f64,
    trials: usize,
    seed: u32,
) -> Result<String, String> {
    let base = experiment(m, bias, trials, seed);
    let config = kind(kind_name)?.apply(&base, value).map_err(|e| e.to_string())?;
    let row = run_point(&config, value).map_err(|e| e.to_string())?;
    Ok(to_json(&PointOutput {
        rmse_peerrank_pct: row.mean_rmse_peerrank_pct,
        rmse_average_pct: row.mean_rmse_average_pct,
        trials: row.trials,
        nonconverged: row.nonconverged,
    }))
}

/// Sweeps `kind` (binomial-p, normal-sd, uniform-lo, bias or group-size)
/// over comma-separated `values`. Returns the sweep JSON array.
#[wasm_bindgen(js_name = runSweep)]
pub fn run_sweep(
    kind_name: &str,
    values: &str,
    m: usize,
    bias: f64,
    trials: usize,
    seed: u32,
) -> Result<String, String> {
    let kind = kind(kind_name)?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", v.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = sweep(kind, &values, &experiment(m, bias, trials, seed)).map_err(|e| e.to_string())?;
    Ok(sweep_to_json(&rows))
}

/// Seed used by the page until the user changes it.
#[wasm_bindgen(js_name = defaultSeed)]
pub fn default_seed() -> u32 {
    DEFAULT_SEED as u32
}
