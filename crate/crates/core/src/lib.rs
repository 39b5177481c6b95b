//! Dynamic logic-geometric programming for human-robot task coordination.

pub mod harness;
pub mod kinematics;
pub mod lgp;
pub mod pddl;
pub mod prediction;
pub mod scalar;
pub mod symbolic;
pub mod trajopt;

pub use scalar::Real;

pub type Pose2 = kinematics::Pose2<f64>;
pub type HumanConfig = kinematics::HumanConfig<f64>;
pub type GeometricState = kinematics::GeometricState<f64>;
pub type Surface = kinematics::Surface<f64>;
pub type NlpParams = trajopt::NlpParams<f64>;
pub type NlpProblem = trajopt::NlpProblem<f64>;
pub type TrajectorySolution = trajopt::TrajectorySolution<f64>;
