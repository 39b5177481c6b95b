//! Phase-structured trajectory optimization: waypoint NLP, analytic
//! evaluation and a Gauss-Newton interior-point solver.

mod banded;
mod eval;
mod problem;
mod solver;

use thiserror::Error;

pub use banded::{BandCholesky, BandMatrix};
pub use eval::{evaluate, from_flat, objective, to_flat, Evaluation, SparseRow};
pub use problem::{build_nlp, Anchor, Constraint, ConstraintKind, NlpParams, NlpProblem, Phase, Tag};
pub use solver::{solve, write_trace_csv, SolverConfig, TraceRow, TrajectorySolution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrajoptError {
    #[error("skeleton is empty")]
    EmptySkeleton,
    #[error("elapsed time {tau} exceeds first phase duration {phase}")]
    TauExceedsPhase { tau: usize, phase: usize },
    #[error("waypoint count {got} does not match problem size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("action {0} does not match the geometric state")]
    InvalidSkeleton(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("no free placement on `{0}`")]
    SurfaceFull(String),
}
