//! PeerRank: aggregate peer grades by weighting every grade with the grader's
//! own (recursively computed) grade.
//!
//! The crate provides
//! - validated grade matrices and the AVERAGE baseline ([`model`]),
//! - the basic and generalized fixed-point rules ([`solver`]),
//! - synthetic cohorts and peer-grading models ([`synth`]),
//! - RMSE scoring ([`metrics`]) and Monte Carlo sweeps ([`experiments`]),
//! - the grade-matrix CSV format ([`io`]).
//!
//! ```
//! use peerrank::{solve, GradeMatrix, PeerRankParams, StepKind};
//!
//! let grades = GradeMatrix::identity(4).unwrap();
//! let report = solve(&grades, &PeerRankParams::default(), StepKind::Basic, None).unwrap();
//! assert!(report.converged);
//! assert!((report.grades[0] - 0.25).abs() < 1e-12);
//! ```

pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod model;
pub mod solver;
pub mod synth;

pub use error::{PeerRankError, Result};
pub use experiments::{run_trial, sweep, ExperimentConfig, SweepKind, SweepRow};
pub use metrics::{rmse_percent, TrialResult};
pub use model::{average_rule, initial_grades, GradeMatrix, GradeVector, PeerRankParams, SolveReport};
pub use solver::{
    accuracy_credit, residual, solve, step_basic, step_generalized, verify_eigenvector, EigenCheck,
    FixedPointIteration, StepKind,
};
pub use synth::{MarkDistribution, MarkingKind, MarkingModel};
