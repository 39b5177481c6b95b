//! Hierarchical human prediction: a tabular MaxEnt IRL task policy over a
//! counting MDP, goal extraction, goal-conditioned motion segments and
//! degraded ground truth for experiments.

mod compose;
mod irl;
mod lowlevel;
mod mdp;
mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::KinematicsError;

pub use compose::{
    compose_actions, compose_prediction, extract_goal, high_level_state, human_location, ComposeConfig,
    ComposedPrediction, GoalPoint,
};
pub use irl::{
    expected_features, irl_fit, most_probable_rollout, rollout_policy, scripted_demo, soft_value_iteration,
    IrlConfig, IrlModel, IrlModelFile, Optimizer, ROLLOUT_CAP,
};
pub use lowlevel::{generate_lowlevel, min_accel_profile, segment_duration, MotionLimits, SegmentKind};
pub use mdp::{
    ClassSpec, DemoFile, DemoSpec, Demonstration, GoalTerm, HighLevelAction, HighLevelState, Mdp, MdpSpec,
    ObjectClass, StartSpec, MAX_STATES,
};
pub use trajectory::{degrade_ground_truth, DegradeWindow, EventKind, HumanEvent, HumanSample, HumanTrajectory};

#[derive(Debug, Error)]
pub enum PredictionError {
    #[error("unknown {0}")]
    UnknownName(String),
    #[error("invalid high-level state {0}")]
    InvalidState(String),
    #[error("state space too large to enumerate (~{0} states)")]
    NonEnumerable(usize),
    #[error("demonstration step {step}: `{action}` is illegal in {state}")]
    IllegalTransition { step: usize, action: String, state: String },
    #[error("demonstration {0} does not reach the goal")]
    DemoIncomplete(usize),
    #[error("no demonstrations")]
    NoDemonstrations,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("rollout did not reach the goal within {0} steps")]
    StepCapExceeded(usize),
    #[error("no free placement on `{0}`")]
    SurfaceFull(String),
    #[error("removal fraction {0} outside [0, 1)")]
    InvalidFraction(f64),
    #[error("trajectory CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

impl From<csv::Error> for PredictionError {
    fn from(e: csv::Error) -> Self {
        PredictionError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for PredictionError {
    fn from(e: std::io::Error) -> Self {
        PredictionError::Csv(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SourceMode {
    Replay,
    Degraded { fraction: f64, seed: u64 },
    Hierarchical { seed: u64 },
}

/// What the human actually does and what the planner is told it will do.
#[derive(Clone, Debug, PartialEq)]
pub struct HumanSource {
    pub mode: SourceMode,
    pub actual: HumanTrajectory,
    pub predicted: HumanTrajectory,
    pub window: Option<DegradeWindow>,
}

impl HumanSource {
    /// The recorded trajectory serves as both truth and prediction.
    pub fn replay(traj: HumanTrajectory) -> Self {
        HumanSource {
            mode: SourceMode::Replay,
            predicted: traj.clone(),
            actual: traj,
            window: None,
        }
    }

    /// The planner sees a degraded copy of the recorded trajectory.
    pub fn degraded(traj: HumanTrajectory, fraction: f64, seed: u64) -> Result<Self, PredictionError> {
        let (predicted, window) = degrade_ground_truth(&traj, fraction, seed)?;
        Ok(HumanSource {
            mode: SourceMode::Degraded { fraction, seed },
            actual: traj,
            predicted,
            window,
        })
    }

    /// The human follows a composed prediction, which the planner also sees.
    pub fn hierarchical(prediction: &ComposedPrediction, seed: u64) -> Self {
        HumanSource {
            mode: SourceMode::Hierarchical { seed },
            actual: prediction.trajectory.clone(),
            predicted: prediction.trajectory.clone(),
            window: None,
        }
    }
}
