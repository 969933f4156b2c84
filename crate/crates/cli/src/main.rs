use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use peerrank::experiments::{run_point, sweep_to_csv, sweep_to_json, DEFAULT_SEED, DEFAULT_TRIALS};
use peerrank::io::load_grade_matrix;
use peerrank::{
    average_rule, solve, sweep, verify_eigenvector, ExperimentConfig, MarkDistribution, MarkingKind, MarkingModel,
    PeerRankError, PeerRankParams, StepKind, SweepKind,
};

const EXIT_NONCONVERGED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Aggregate peer grades with the PeerRank rule and compare it with plain
/// averaging on synthetic cohorts.
///
/// Exit codes: 0 success, 1 some solve hit --max-iters, 2 bad input file,
/// 3 bad command line.
#[derive(Debug, Parser)]
#[command(name = "peerrank", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grade a matrix read from CSV (row i holds the grades agent i received).
    Grade(GradeArgs),
    /// Average the error of PeerRank and AVERAGE over synthetic trials.
    Simulate(SimulateArgs),
    /// Repeat `simulate` for each value of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Weight of the grade-weighted average term.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Weight of the accuracy credit. Zero selects the basic rule.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Stop once no grade moves by more than this.
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

impl SolverArgs {
    fn params(&self) -> Result<PeerRankParams, Failure> {
        let params = PeerRankParams {
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            ..Default::default()
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct GradeArgs {
    /// Grade matrix CSV.
    matrix: PathBuf,
    /// 0/1 CSV of the same shape marking which grades were given.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Report how far the basic fixed point is from an eigenvector of the matrix.
    #[arg(long)]
    eigen: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Dist {
    Binomial,
    Normal,
    Uniform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    BinomialSum,
    NormalNoise,
    UniformNoise,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Distribution of true marks.
    #[arg(long, value_enum, default_value_t = Dist::Binomial)]
    dist: Dist,
    /// Success probability of binomial marks.
    #[arg(long, default_value_t = 0.7)]
    p: f64,
    /// Mean of normal marks.
    #[arg(long, default_value_t = 70.0)]
    mean: f64,
    /// Standard deviation of normal marks.
    #[arg(long, default_value_t = 15.0)]
    sd: f64,
    /// Lowest uniform mark; the highest is 100.
    #[arg(long, default_value_t = 50)]
    lo: u32,
    /// How graders turn a true mark into a peer grade.
    #[arg(long, value_enum, default_value_t = Model::BinomialSum)]
    model: Model,
    /// Spread constant of the noise models.
    #[arg(long, default_value_t = MarkingModel::DEFAULT_NOISE_SCALE)]
    noise_scale: f64,
    #[arg(long, default_value_t = 10)]
    questions: u32,
    /// Factor applied to every peer grade before clamping.
    #[arg(long, default_value_t = 1.0)]
    bias: f64,
    /// Group size.
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig, Failure> {
        let dist = match self.dist {
            Dist::Binomial => MarkDistribution::Binomial { p: self.p },
            Dist::Normal => MarkDistribution::Normal {
                mean: self.mean,
                sd: self.sd,
            },
            Dist::Uniform => MarkDistribution::uniform_from(self.lo),
        };
        let kind = match self.model {
            Model::BinomialSum => MarkingKind::BinomialSum,
            Model::NormalNoise => MarkingKind::NormalNoise {
                scale: self.noise_scale,
            },
            Model::UniformNoise => MarkingKind::UniformNoise {
                scale: self.noise_scale,
            },
        };
        let config = ExperimentConfig {
            m: self.m,
            dist,
            model: MarkingModel {
                kind,
                questions: self.questions,
            },
            bias_r: self.bias,
            params: self.solver.params()?,
            trials: self.trials,
            base_seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// binomial-p, normal-sd, uniform-lo, bias or group-size.
    #[arg(long, value_parser = parse_kind)]
    kind: SweepKind,
    /// Comma-separated list, or an inclusive range `a..b` with optional `:step`.
    #[arg(long)]
    values: String,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_kind(s: &str) -> Result<SweepKind, String> {
    s.parse().map_err(|e: PeerRankError| e.to_string())
}

/// A failed command: message for standard error and the exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<PeerRankError> for Failure {
    fn from(e: PeerRankError) -> Self {
        match e {
            PeerRankError::InvalidParameter { .. } => Failure::usage(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

/// Per-kind step used when a range omits `:step`.
fn default_step(kind: SweepKind) -> f64 {
    match kind {
        SweepKind::BinomialP | SweepKind::Bias => 0.05,
        SweepKind::NormalSd => 5.0,
        SweepKind::UniformLo => 10.0,
        SweepKind::GroupSize => 1.0,
    }
}

fn parse_values(spec: &str, kind: SweepKind) -> Result<Vec<f64>, Failure> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Failure::usage(format!("--values: `{}` is not a number", s.trim())))
    };
    let Some((from, rest)) = spec.split_once("..") else {
        return spec.split(',').map(number).collect();
    };
    let (to, step) = match rest.split_once(':') {
        Some((to, step)) => (number(to)?, number(step)?),
        None => (number(rest)?, default_step(kind)),
    };
    let from = number(from)?;
    if step <= 0.0 {
        return Err(Failure::usage("--values: step must be positive"));
    }
    if to < from {
        return Err(Failure::usage(format!("--values: empty range {from}..{to}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    // Snap to 1e-9 so 0.65 + 5·0.05 prints as 0.9.
    Ok((0..=n)
        .map(|k| ((from + k as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct GradeReport {
    rule: StepKind,
    converged: bool,
    iterations: usize,
    final_residual: f64,
    peerrank: Vec<f64>,
    average: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigen: Option<EigenReport>,
}

#[derive(Serialize)]
struct EigenReport {
    /// None when every grade is zero and the check has no meaning.
    max_defect: Option<f64>,
    is_eigenvector: Option<bool>,
    tolerance: f64,
}

fn cmd_grade(args: &GradeArgs) -> Result<u8, Failure> {
    let params = args.solver.params()?;
    let kind = if params.beta == 0.0 {
        StepKind::Basic
    } else {
        StepKind::Generalized
    };
    if args.eigen && kind == StepKind::Generalized {
        return Err(Failure::usage("--eigen needs the basic rule; pass --beta 0"));
    }
    let matrix = load_grade_matrix(&args.matrix, args.mask.as_deref())?;
    if args.eigen && matrix.is_masked() {
        return Err(Failure::input(PeerRankError::MaskedMatrix.to_string()));
    }
    let report = solve(&matrix, &params, kind, None)?;
    let eigen = if args.eigen {
        let tolerance = 100.0 * params.epsilon;
        Some(match verify_eigenvector(&matrix, &report.grades, tolerance) {
            Ok(check) => EigenReport {
                max_defect: Some(check.max_defect),
                is_eigenvector: Some(check.is_eigenvector),
                tolerance,
            },
            Err(PeerRankError::ZeroVector) => EigenReport {
                max_defect: None,
                is_eigenvector: None,
                tolerance,
            },
            Err(e) => return Err(e.into()),
        })
    } else {
        None
    };
    let out = GradeReport {
        rule: kind,
        converged: report.converged,
        iterations: report.iterations,
        final_residual: report.final_residual,
        peerrank: report.grades.into_inner(),
        average: average_rule(&matrix).into_inner(),
        eigen,
    };
    let text = match args.out.format {
        Format::Json => json(&out),
        Format::Csv => grade_csv(&out),
    };
    emit(&args.out, &text)?;
    if out.converged {
        Ok(0)
    } else {
        eprintln!(
            "peerrank: no convergence after {} iterations (residual {:e} > epsilon {:e})",
            out.iterations, out.final_residual, params.epsilon
        );
        Ok(EXIT_NONCONVERGED)
    }
}

fn grade_csv(report: &GradeReport) -> String {
    let mut s = String::from("agent,peerrank,average\n");
    for (i, (x, a)) in report.peerrank.iter().zip(&report.average).enumerate() {
        let _ = writeln!(s, "{i},{x:.6},{a:.6}");
    }
    if let Some(e) = &report.eigen {
        match e.max_defect {
            Some(d) => {
                let _ = writeln!(s, "# eigen_defect,{d:e}");
            }
            None => s.push_str("# eigen_defect,undefined (all grades are zero)\n"),
        }
    }
    s
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SimulateReport {
    rmse_peerrank_pct: f64,
    rmse_average_pct: f64,
    trials: usize,
    nonconverged: usize,
}

fn nonconverged_status(nonconverged: usize) -> u8 {
    if nonconverged == 0 {
        0
    } else {
        eprintln!("peerrank: {nonconverged} trial solve(s) hit --max-iters");
        EXIT_NONCONVERGED
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8, Failure> {
    let config = args.experiment.config()?;
    let row = run_point(&config, f64::NAN)?;
    let report = SimulateReport {
        rmse_peerrank_pct: row.mean_rmse_peerrank_pct,
        rmse_average_pct: row.mean_rmse_average_pct,
        trials: row.trials,
        nonconverged: row.nonconverged,
    };
    let text = match args.out.format {
        Format::Json => json(&report),
        Format::Csv => format!(
            "rmse_peerrank_pct,rmse_average_pct,trials,nonconverged\n{},{},{},{}\n",
            report.rmse_peerrank_pct, report.rmse_average_pct, report.trials, report.nonconverged
        ),
    };
    emit(&args.out, &text)?;
    Ok(nonconverged_status(report.nonconverged))
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8, Failure> {
    let values = parse_values(&args.values, args.kind)?;
    let base = args.experiment.config()?;
    let rows = sweep(args.kind, &values, &base)?;
    let text = match args.out.format {
        Format::Json => sweep_to_json(&rows),
        Format::Csv => sweep_to_csv(&rows),
    };
    emit(&args.out, &text)?;
    Ok(nonconverged_status(rows.iter().map(|r| r.nonconverged).sum()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Grade(a) => cmd_grade(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("peerrank: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
