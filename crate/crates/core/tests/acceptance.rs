//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p peerrank --test acceptance -- --nocapture --test-threads 1`
//! to see them in order.

use std::time::{Duration, Instant};

use rand::Rng;

use peerrank::experiments::{
    sweep_bias_r, sweep_binomial_p, sweep_group_size, sweep_normal_sd, sweep_to_csv, sweep_uniform_lo,
    ExperimentConfig, SweepRow,
};
use peerrank::synth::{rng_from_seed, MarkDistribution};
use peerrank::{solve, verify_eigenvector, FixedPointIteration, GradeMatrix, PeerRankParams, StepKind};

fn report(id: &str, name: &str, pass: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let in_time = elapsed < limit;
    let ok = pass && in_time;
    println!(
        "[{}] AC{id} {name}: {detail} ({:.2}s, limit {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(pass, "AC{id} {name} failed: {detail}");
    assert!(in_time, "AC{id} {name} exceeded its {}s budget", limit.as_secs());
}

fn random_matrix(rng: &mut impl Rng, m: usize) -> GradeMatrix {
    let flat = (0..m * m).map(|_| rng.random::<f64>()).collect();
    GradeMatrix::from_flat(m, flat).unwrap()
}

fn basic() -> PeerRankParams {
    PeerRankParams::default()
}

#[test]
fn ac01_unanimity() {
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for _ in 0..50 {
        let m = rng.random_range(2..=20);
        let k: f64 = rng.random();
        let a = GradeMatrix::unanimous(m, k).unwrap();
        let r = solve(&a, &basic(), StepKind::Basic, None).unwrap();
        all_converged &= r.converged;
        worst = r.grades.as_slice().iter().map(|x| (x - k).abs()).fold(worst, f64::max);
    }
    report(
        "1",
        "unanimity",
        all_converged && worst <= 1e-8,
        &format!("50 matrices, max |x - k| = {worst:.2e} (tol 1e-8)"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn ac02_identity() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for m in 2..=12 {
        let r = solve(&GradeMatrix::identity(m).unwrap(), &basic(), StepKind::Basic, None).unwrap();
        all_converged &= r.converged;
        let target = 1.0 / m as f64;
        worst = r
            .grades
            .as_slice()
            .iter()
            .map(|x| (x - target).abs())
            .fold(worst, f64::max);
    }
    report(
        "2",
        "identity",
        all_converged && worst <= 1e-8,
        &format!("m = 2..=12, max |x - 1/m| = {worst:.2e} (tol 1e-8)"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

/// Good agents give 1 to good agents and 0 to bad ones; bad agents give 1 to
/// everyone. Good agents come first.
fn bivalent(good: usize, bad: usize) -> GradeMatrix {
    GradeMatrix::from_fn(good + bad, |i, j| if j >= good || i < good { 1.0 } else { 0.0 }).unwrap()
}

#[test]
fn ac03_bivalent() {
    let start = Instant::now();
    // With equal numbers of good and bad agents the bad grades approach 0
    // only like 1/n, so the stopping tolerance must be tight enough for the
    // last iterate to be below 1e-6.
    let params = PeerRankParams {
        epsilon: 9e-14,
        max_iters: 50_000_000,
        ..basic()
    };
    let mut details = Vec::new();
    let mut pass = true;
    for (good, bad) in [(1, 1), (3, 3), (7, 3)] {
        let a = bivalent(good, bad);
        let mut it = FixedPointIteration::new(&a, &params, StepKind::Basic, None).unwrap();
        let mut monotone = true;
        let mut converged = false;
        while it.steps() < params.max_iters {
            let r = it.advance();
            monotone &= it.current()[good..]
                .iter()
                .zip(&it.previous()[good..])
                .all(|(now, was)| now <= was);
            if r <= params.epsilon {
                converged = true;
                break;
            }
        }
        let x = it.current();
        let min_good = x[..good].iter().copied().fold(f64::INFINITY, f64::min);
        let max_bad = x[good..].iter().copied().fold(0.0, f64::max);
        let ok = converged && monotone && min_good >= 1.0 - 1e-6 && max_bad <= 1e-6;
        pass &= ok;
        details.push(format!(
            "({good},{bad}): good>={min_good:.9} bad<={max_bad:.2e} monotone={monotone} steps={}",
            it.steps()
        ));
    }
    report(
        "3",
        "bivalent",
        pass,
        &details.join("; "),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn ac04_domain() {
    let start = Instant::now();
    let mut rng = rng_from_seed(404);
    let mut iterates = 0usize;
    let mut violations = 0usize;
    for case in 0..1000 {
        let m = rng.random_range(1..=12);
        let a = if case % 4 == 3 {
            // Masked instances: drop cells at random but keep a grader per row.
            let raw: Vec<Vec<f64>> = (0..m).map(|_| (0..m).map(|_| rng.random()).collect()).collect();
            let mut mask: Vec<Vec<bool>> = (0..m).map(|_| (0..m).map(|_| rng.random_bool(0.6)).collect()).collect();
            for (i, row) in mask.iter_mut().enumerate() {
                row[(i + 1) % m] = true;
            }
            GradeMatrix::new(raw, Some(mask)).unwrap()
        } else {
            random_matrix(&mut rng, m)
        };
        let alpha = rng.random_range(1e-3..0.999);
        let beta = rng.random_range(0.0..=1.0 - alpha);
        let params = PeerRankParams {
            alpha,
            beta,
            max_iters: 2_000,
            ..basic()
        };
        for kind in [StepKind::Basic, StepKind::Generalized] {
            let mut it = FixedPointIteration::new(&a, &params, kind, None).unwrap();
            loop {
                iterates += 1;
                violations += it.current().iter().filter(|x| !(0.0..=1.0).contains(*x)).count();
                if it.steps() >= params.max_iters || it.advance() <= params.epsilon {
                    iterates += 1;
                    violations += it.current().iter().filter(|x| !(0.0..=1.0).contains(*x)).count();
                    break;
                }
            }
        }
    }
    report(
        "4",
        "domain",
        violations == 0,
        &format!("1000 matrices x 2 rules, {iterates} iterates checked, {violations} out of [0,1]"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn ac05_eigenvector() {
    let start = Instant::now();
    let mut rng = rng_from_seed(505);
    let params = basic();
    let tol = 100.0 * params.epsilon;
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for _ in 0..200 {
        let m = rng.random_range(2..=10);
        let a = random_matrix(&mut rng, m);
        let r = solve(&a, &params, StepKind::Basic, None).unwrap();
        all_converged &= r.converged;
        worst = worst.max(verify_eigenvector(&a, &r.grades, tol).unwrap().max_defect);
    }
    report(
        "5",
        "eigenvector",
        all_converged && worst <= tol,
        &format!("200 matrices, max ||Ax - (sum x)x|| = {worst:.2e} (tol {tol:.0e})"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn ac06_symmetry_no_dummy_no_discrimination() {
    let start = Instant::now();
    let mut rng = rng_from_seed(606);
    let params = basic();

    let mut sym_worst: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.random_range(2..=12);
        let a = random_matrix(&mut rng, m);
        let p = rng.random_range(0..m);
        let q = rng.random_range(0..m);
        let b = a.swapped(p, q).unwrap();
        for kind in [StepKind::Basic, StepKind::Generalized] {
            let x = solve(&a, &params, kind, None).unwrap().grades;
            let y = solve(&b, &params, kind, None).unwrap().grades;
            let mut perm: Vec<usize> = (0..m).collect();
            perm.swap(p, q);
            let expected = x.permuted(&perm).unwrap();
            sym_worst = expected
                .as_slice()
                .iter()
                .zip(y.as_slice())
                .map(|(u, v)| (u - v).abs())
                .fold(sym_worst, f64::max);
        }
    }

    let mut dummy_ok = true;
    for case in 0..200 {
        let m = 2 + case % 15;
        let agent = rng.random_range(0..m);
        let ones = GradeMatrix::unanimous(m, 1.0).unwrap();
        let zeroed = GradeMatrix::from_fn(m, |_, j| if j == agent { 0.0 } else { 1.0 }).unwrap();
        let x = solve(&ones, &params, StepKind::Basic, None).unwrap().grades;
        let y = solve(&zeroed, &params, StepKind::Basic, None).unwrap().grades;
        dummy_ok &= x.as_slice().iter().all(|v| (v - 1.0).abs() <= 1e-8);
        dummy_ok &= x != y;
    }

    let mut disc_worst: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.random_range(1..=15);
        let target: Vec<f64> = (0..m).map(|_| rng.random()).collect();
        let a = GradeMatrix::from_fn(m, |i, _| target[i]).unwrap();
        let x = solve(&a, &params, StepKind::Basic, None).unwrap().grades;
        disc_worst = x
            .as_slice()
            .iter()
            .zip(&target)
            .map(|(u, v)| (u - v).abs())
            .fold(disc_worst, f64::max);
    }

    report(
        "6",
        "symmetry/no-dummy/no-discrimination",
        sym_worst <= 1e-8 && dummy_ok && disc_worst <= 1e-8,
        &format!(
            "symmetry max dev {sym_worst:.2e}, no-dummy {}, no-discrimination max dev {disc_worst:.2e} (tol 1e-8)",
            if dummy_ok { "ok" } else { "violated" }
        ),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

fn figure1_config() -> ExperimentConfig {
    ExperimentConfig {
        m: 10,
        params: PeerRankParams::new(0.1, 0.1).unwrap(),
        trials: 200,
        ..Default::default()
    }
}

const FIGURE1_P: [f64; 7] = [0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90];

fn print_rows(label: &str, rows: &[SweepRow]) {
    for r in rows {
        println!(
            "    {label} {:>6}: peerrank {:6.3}%  average {:6.3}%  nonconverged {}",
            r.swept_value, r.mean_rmse_peerrank_pct, r.mean_rmse_average_pct, r.nonconverged
        );
    }
}

#[test]
fn ac07_figure1_binomial_p() {
    let start = Instant::now();
    let rows = sweep_binomial_p(&FIGURE1_P, &figure1_config()).unwrap();
    let beats = rows
        .iter()
        .filter(|r| r.swept_value >= 0.65)
        .all(|r| r.mean_rmse_peerrank_pct < r.mean_rmse_average_pct);
    let within_5 = rows
        .iter()
        .filter(|r| r.swept_value >= 0.70)
        .all(|r| r.mean_rmse_peerrank_pct <= 5.0);
    let max_avg = rows
        .iter()
        .filter(|r| r.swept_value >= 0.65)
        .map(|r| r.mean_rmse_average_pct)
        .fold(0.0, f64::max);
    let at = |p: f64| rows.iter().find(|r| r.swept_value == p).unwrap().mean_rmse_peerrank_pct;
    let trend = at(0.90) < at(0.65);
    print_rows("p", &rows);
    report(
        "7",
        "figure-1 binomial p",
        beats && within_5 && max_avg >= 8.0 && trend,
        &format!(
            "(a) peerrank < average for p>=0.65: {beats}; (b) peerrank <= 5% for p>=0.70: {within_5}; \
             (c) max average {max_avg:.2}% >= 8%; trend p=0.9 < p=0.65: {trend}"
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn ac08_factor_two_headline() {
    let start = Instant::now();
    let config = ExperimentConfig {
        trials: 500,
        ..figure1_config()
    };
    let row = sweep_binomial_p(&[0.7], &config).unwrap()[0];
    let ratio = row.mean_rmse_average_pct / row.mean_rmse_peerrank_pct;
    report(
        "8",
        "factor-2 headline",
        ratio >= 2.0,
        &format!(
            "average {:.3}% / peerrank {:.3}% = {ratio:.3} (need >= 2)",
            row.mean_rmse_average_pct, row.mean_rmse_peerrank_pct
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn ac09_bias_robustness() {
    let start = Instant::now();
    let rows = sweep_bias_r(&[0.75, 0.9, 1.0, 1.1, 1.25], &figure1_config()).unwrap();
    print_rows("r", &rows);
    let worst = rows.iter().map(|r| r.mean_rmse_peerrank_pct).fold(0.0, f64::max);
    report(
        "9",
        "bias robustness",
        worst <= 6.0,
        &format!("max peerrank RMSE over r in [0.75, 1.25] = {worst:.3}% (need <= 6%)"),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn ac10_group_size() {
    let start = Instant::now();
    let rows = sweep_group_size(&[5.0, 10.0, 20.0], &figure1_config()).unwrap();
    print_rows("m", &rows);
    let m5 = rows[0];
    let m5_ok = m5.mean_rmse_peerrank_pct <= 5.0 && m5.mean_rmse_peerrank_pct <= m5.mean_rmse_average_pct / 2.0;
    let big_ok = rows[1..]
        .iter()
        .all(|r| r.mean_rmse_peerrank_pct <= r.mean_rmse_average_pct / 2.0);
    let ratios: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "m={} ratio {:.3}",
                r.swept_value,
                r.mean_rmse_average_pct / r.mean_rmse_peerrank_pct
            )
        })
        .collect();
    report(
        "10",
        "group size",
        m5_ok && big_ok,
        &format!(
            "m=5 peerrank {:.3}% (<= 5% and <= average/2: {m5_ok}); m in {{10,20}} <= average/2: {big_ok}; {}",
            m5.mean_rmse_peerrank_pct,
            ratios.join(", ")
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn ac11_determinism() {
    let start = Instant::now();
    let config = figure1_config();
    let first = sweep_to_csv(&sweep_binomial_p(&FIGURE1_P, &config).unwrap());
    let again = sweep_to_csv(&sweep_binomial_p(&FIGURE1_P, &config).unwrap());
    let other_rows = sweep_binomial_p(
        &FIGURE1_P,
        &ExperimentConfig {
            base_seed: config.base_seed ^ 0xDEAD_BEEF,
            ..config
        },
    )
    .unwrap();
    let rows = sweep_binomial_p(&FIGURE1_P, &config).unwrap();
    let shift = rows
        .iter()
        .zip(&other_rows)
        .flat_map(|(a, b)| {
            [
                (a.mean_rmse_peerrank_pct - b.mean_rmse_peerrank_pct).abs(),
                (a.mean_rmse_average_pct - b.mean_rmse_average_pct).abs(),
            ]
        })
        .fold(0.0, f64::max);
    let identical = first == again;
    report(
        "11",
        "determinism",
        identical && shift < 1.0,
        &format!("same seed byte-identical: {identical}; max shift under a new seed {shift:.3} points (need < 1)"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn figure2_normal_sd_trend() {
    let start = Instant::now();
    let sds = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0];
    let rows = sweep_normal_sd(&sds, &figure1_config()).unwrap();
    print_rows("sd", &rows);
    // PeerRank may lose only at the large-sd end: the losing points must form
    // a tail of the sorted sd list that leaves the smaller half untouched.
    let wins: Vec<bool> = rows
        .iter()
        .map(|r| r.mean_rmse_peerrank_pct < r.mean_rmse_average_pct)
        .collect();
    let first_loss = wins.iter().position(|w| !w).unwrap_or(wins.len());
    let tail_only = wins[first_loss..].iter().all(|w| !w);
    let small_half_wins = first_loss >= sds.len().div_ceil(2);
    report(
        "F2",
        "figure-2 normal sd trend",
        tail_only && small_half_wins,
        &format!(
            "peerrank wins at sd < {}: {wins:?}",
            sds.get(first_loss).copied().unwrap_or(f64::INFINITY)
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn figure3_uniform_lo_trend() {
    let start = Instant::now();
    let los = [0.0, 20.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];
    let rows = sweep_uniform_lo(&los, &figure1_config()).unwrap();
    print_rows("lo", &rows);
    let worst = rows
        .iter()
        .filter(|r| r.swept_value >= 50.0)
        .map(|r| r.mean_rmse_peerrank_pct)
        .fold(0.0, f64::max);
    report(
        "F3",
        "figure-3 uniform lo trend",
        worst < 10.0,
        &format!("max peerrank RMSE for lo >= 50 = {worst:.3}% (need < 10%)"),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn perfect_cohort_sweep_point_is_exact() {
    let row = sweep_binomial_p(&[1.0], &figure1_config()).unwrap()[0];
    assert_eq!(row.mean_rmse_peerrank_pct, 0.0);
    assert_eq!(row.mean_rmse_average_pct, 0.0);
    let dist_check = ExperimentConfig {
        dist: MarkDistribution::Binomial { p: 1.0 },
        ..figure1_config()
    };
    assert_eq!(peerrank::run_trial(&dist_check, 17).unwrap().rmse_peerrank_pct, 0.0);
}
