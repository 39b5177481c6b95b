//! Planar kinematic tree for robot, human and objects, predicate deduction and
//! pick/place switches.

mod pose;
mod surface;
mod tree;
mod world;

use thiserror::Error;

use crate::pddl::{Atom, Domain, GroundedAction};
use crate::symbolic::SymbolicState;
use crate::Real;

pub use pose::{dist2, Placement, Pose2};
pub use surface::Surface;
pub use tree::{Frame, JointKind, KinematicTree};
pub use world::{GeometricState, GeometryParams, Holder, HumanConfig};

pub const WORLD: &str = "world";
pub const ROBOT: &str = "robot";
pub const GRIPPER: &str = "robot-gripper";
pub const HUMAN: &str = "human";
pub const HAND: &str = "human-hand";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("unknown frame `{0}`")]
    UnknownFrame(String),
    #[error("duplicate frame `{0}`")]
    DuplicateFrame(String),
    #[error("reparenting `{0}` would create a cycle")]
    Cycle(String),
    #[error("grasp tolerance violated for `{object}`: distance {distance:.4} m")]
    GraspTolerance { object: String, distance: f64 },
    #[error("object `{object}` is not attached to expected parent `{expected}`")]
    ObjectNotAttached { object: String, expected: String },
    #[error("release pose of `{object}` lies outside surface `{surface}`")]
    PlacementOutsideSurface { object: String, surface: String },
}

fn declared(domain: &Domain, pred: &str, arity: usize) -> bool {
    domain.predicate(pred).is_some_and(|p| p.arity() == arity)
}

/// Symbolic state read off the geometry.
///
/// `on`, `agent-carry` and `human-carry` follow the stable joints of each
/// object, `agent-at` (and `human-at` if declared) the distance to each
/// surface center against the surface radius. `agent-free` holds when the
/// robot carries nothing; `agent-avoid-human` is emitted whenever declared.
/// Only predicates and constants known to `domain` are produced.
pub fn deduce_state<T: Real>(x: &GeometricState<T>, domain: &Domain) -> SymbolicState {
    let mut s = SymbolicState::new();
    let known = |c: &str| domain.constant_type(c).is_some();
    let mut robot_carries = false;
    for o in x.objects() {
        let holder = x.holder(o).expect("object frame");
        robot_carries |= holder == Holder::Robot;
        if !known(o) {
            continue;
        }
        match holder {
            Holder::Surface(l) if known(&l) && declared(domain, "on", 2) => {
                s.insert(Atom::new("on", &[o, &l]));
            }
            Holder::Robot if declared(domain, "agent-carry", 1) => {
                s.insert(Atom::new("agent-carry", &[o]));
            }
            Holder::Human if declared(domain, "human-carry", 1) => {
                s.insert(Atom::new("human-carry", &[o]));
            }
            _ => {}
        }
    }
    let robot = x.robot().xy();
    let pelvis = x.human().pelvis;
    for sf in x.surfaces().iter().filter(|sf| known(&sf.name)) {
        if declared(domain, "agent-at", 1) && dist2(robot, sf.center) <= sf.radius {
            s.insert(Atom::new("agent-at", &[&sf.name]));
        }
        if declared(domain, "human-at", 1) && dist2(pelvis, sf.center) <= sf.radius {
            s.insert(Atom::new("human-at", &[&sf.name]));
        }
    }
    if !robot_carries && declared(domain, "agent-free", 0) {
        s.insert(Atom::new("agent-free", &[]));
    }
    if declared(domain, "agent-avoid-human", 0) {
        s.insert(Atom::new("agent-avoid-human", &[]));
    }
    s
}

/// Kinematic switch of a robot action: `pick(X, L)` moves X from surface L to
/// the gripper, `place(X, L)` from the gripper onto L. Other actions leave the
/// tree unchanged.
pub fn apply_switch<T: Real>(
    x: &GeometricState<T>,
    action: &GroundedAction,
) -> Result<GeometricState<T>, KinematicsError> {
    let mut out = x.clone();
    let args = || {
        match (action.arg(0), action.arg(1)) {
            (Some(o), Some(l)) => Ok((o, l)),
            _ => Err(KinematicsError::UnknownFrame(action.to_string())),
        }
    };
    match action.name.as_str() {
        "pick" => {
            let (o, l) = args()?;
            out.robot_pick(o, l)?;
        }
        "place" => {
            let (o, l) = args()?;
            out.robot_place(o, l)?;
        }
        _ => {}
    }
    Ok(out)
}
