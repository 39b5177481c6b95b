//! Scenario files, batch experiments, metrics and reports.

mod batch;
mod report;
mod scenario;
mod suite;

use thiserror::Error;

use crate::kinematics::KinematicsError;
use crate::lgp::LgpError;
use crate::pddl::PddlError;
use crate::prediction::PredictionError;

pub use batch::{
    aggregate, read_seeds, run_batch, run_scenario, task_iou, Aggregate, BatchConfig, MetricsTable, ModeSummary,
    RunRecord, ScenarioRun,
};
pub use report::{emit_report, read_runs_csv, write_runs_csv, REPORT_FILES};
pub use scenario::{
    human_alone_steps, load_scenario, parse_scenario_file, GeometrySpec, HumanBase, HumanMode, HumanSpec,
    ObjectSpec, Scenario, ScenarioFile, SurfaceSpec, SCHEMA_VERSION,
};
pub use suite::{generate_suite, load_suite, SuiteConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("dangling reference in {field}: `{name}`")]
    DanglingReference { field: String, name: String },
    #[error("inconsistent scenario: {0}")]
    Inconsistent(String),
    #[error("report requires a nonempty table")]
    EmptyTable,
    #[error("seeds: {0}")]
    Seeds(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Prediction(#[from] PredictionError),
    #[error(transparent)]
    Lgp(#[from] LgpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Csv(e.to_string())
    }
}
