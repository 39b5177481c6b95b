use serde::{Deserialize, Serialize};

use super::TrajoptError;
use crate::kinematics::{GeometricState, Holder, HumanConfig, Pose2, GRIPPER};
use crate::pddl::GroundedAction;
use crate::symbolic::Skeleton;
use crate::Real;

/// Geometric and cost parameters of the phase NLP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NlpParams<T> {
    /// Step length in seconds (10 Hz).
    pub dt: T,
    /// Velocity weight, s²·m⁻².
    pub w_v: T,
    /// Acceleration weight, s⁴·m⁻².
    pub w_a: T,
    /// Human clearance radius around the pelvis, meters.
    pub r_safe: T,
    /// The robot stays this far inside a location's `agent-at` disc.
    pub location_margin: T,
    /// Placements stay this far inside the surface rectangle.
    pub place_margin: T,
    /// Minimum distance between a placed object and resting objects.
    pub object_clearance: T,
    /// Extra distance added to the clearance when choosing placement keyframes.
    pub slot_slack: T,
}

impl<T: Real> Default for NlpParams<T> {
    fn default() -> Self {
        NlpParams {
            dt: T::lit(0.1),
            w_v: T::one(),
            w_a: T::lit(10.0),
            r_safe: T::lit(0.5),
            location_margin: T::lit(0.05),
            place_margin: T::lit(0.05),
            object_clearance: T::lit(0.15),
            slot_slack: T::lit(0.02),
        }
    }
}

/// Which point of the robot a constraint acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Anchor {
    Base,
    Gripper,
}

/// Origin of a constraint, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    Human,
    Location,
    Grasp,
    Placement,
    ObjectClearance,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintKind<T> {
    /// Equality: anchor at `target` (two residuals).
    Reach { target: [T; 2] },
    /// `‖p − center‖ ≥ radius`.
    Clearance { center: [T; 2], radius: T },
    /// `‖p − center‖ ≤ radius`.
    Within { center: [T; 2], radius: T },
    /// `lo ≤ p ≤ hi` componentwise (four residuals).
    Inside { lo: [T; 2], hi: [T; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    /// Waypoint index, 0 for the first optimized step.
    pub step: usize,
    pub anchor: Anchor,
    pub kind: ConstraintKind<T>,
    pub tag: Tag,
}

impl<T> Constraint<T> {
    pub fn is_equality(&self) -> bool {
        matches!(self.kind, ConstraintKind::Reach { .. })
    }

    pub fn residual_count(&self) -> usize {
        match self.kind {
            ConstraintKind::Reach { .. } => 2,
            ConstraintKind::Inside { .. } => 4,
            _ => 1,
        }
    }
}

/// One skeleton action mapped onto waypoints `first .. first + len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Phase<T> {
    pub action: GroundedAction,
    pub first: usize,
    pub len: usize,
    /// Base position the warm start reaches at the phase end.
    pub keyframe: [T; 2],
}

impl<T> Phase<T> {
    /// Index of the last waypoint, `None` for an empty phase.
    pub fn end(&self) -> Option<usize> {
        (self.len > 0).then(|| self.first + self.len - 1)
    }
}

/// Stacked waypoints with smoothness cost and per-phase constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct NlpProblem<T> {
    /// Fixed configuration before the first waypoint.
    pub start: Pose2<T>,
    /// Fixed configuration one step before `start`, for acceleration continuity.
    pub prev: Option<Pose2<T>>,
    pub steps: usize,
    pub params: NlpParams<T>,
    /// Gripper offset in the robot base frame.
    pub gripper_offset: [T; 2],
    pub constraints: Vec<Constraint<T>>,
    pub phases: Vec<Phase<T>>,
}

impl<T: Real> NlpProblem<T> {
    pub fn dim(&self) -> usize {
        3 * self.steps
    }

    /// Straight-line interpolation between the phase keyframes, heading held.
    pub fn interpolation(&self) -> Vec<Pose2<T>> {
        let mut out = Vec::with_capacity(self.steps);
        let mut cur = self.start.xy();
        for ph in &self.phases {
            for s in 1..=ph.len {
                let a = T::lit(s as f64) / T::lit(ph.len as f64);
                out.push(Pose2::new(
                    cur[0] + (ph.keyframe[0] - cur[0]) * a,
                    cur[1] + (ph.keyframe[1] - cur[1]) * a,
                    self.start.phi,
                ));
            }
            if ph.len > 0 {
                cur = ph.keyframe;
            }
        }
        out.resize(self.steps, Pose2::new(cur[0], cur[1], self.start.phi));
        out
    }

    pub fn equality_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.is_equality())
            .map(|c| c.residual_count())
            .sum()
    }

    pub fn inequality_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| !c.is_equality())
            .map(|c| c.residual_count())
            .sum()
    }
}

fn rotate<T: Real>(phi: T, v: [T; 2]) -> [T; 2] {
    let (s, c) = phi.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Builds the NLP for `skeleton` from `x`, skipping the first `tau` steps of
/// its first phase.
///
/// `human[k]` is the human configuration `k` steps after `x`; the last entry is
/// held beyond the end. An empty slice means no human is present.
pub fn build_nlp<T: Real>(
    skeleton: &Skeleton,
    x: &GeometricState<T>,
    human: &[HumanConfig<T>],
    tau: usize,
    params: &NlpParams<T>,
) -> Result<NlpProblem<T>, TrajoptError> {
    if skeleton.is_empty() {
        return Err(TrajoptError::EmptySkeleton);
    }
    let first = skeleton.phase_durations[0];
    if tau > first {
        return Err(TrajoptError::TauExceedsPhase { tau, phase: first });
    }
    let start = x.robot();
    let offset = x
        .tree
        .frame(GRIPPER)
        .map(|f| f.placement.xy())
        .unwrap_or([T::zero(), T::zero()]);
    let to_base = |p: [T; 2]| {
        let o = rotate(start.phi, offset);
        [p[0] - o[0], p[1] - o[1]]
    };

    // Object positions along the skeleton: Some((surface, xy)) when resting.
    let mut resting: Vec<(String, Option<(String, [T; 2])>)> = x
        .objects()
        .iter()
        .map(|o| {
            let at = match x.holder(o) {
                Ok(Holder::Surface(s)) => Some((s, x.object_world(o).expect("object").xy())),
                _ => None,
            };
            (o.clone(), at)
        })
        .collect();
    let occupied = |resting: &[(String, Option<(String, [T; 2])>)], surface: &str| -> Vec<[T; 2]> {
        resting
            .iter()
            .filter_map(|(_, r)| r.as_ref())
            .filter(|(s, _)| s == surface)
            .map(|(_, p)| *p)
            .collect()
    };
    let slot = |resting: &[(String, Option<(String, [T; 2])>)], surface: &str| -> Result<[T; 2], TrajoptError> {
        let sf = x
            .surface(surface)
            .map_err(|_| TrajoptError::UnknownLocation(surface.to_string()))?;
        sf.closest_free_point(
            sf.center,
            &occupied(resting, surface),
            params.object_clearance + params.slot_slack,
            params.place_margin + params.slot_slack,
        )
        .ok_or_else(|| TrajoptError::SurfaceFull(surface.to_string()))
    };

    let mut constraints = Vec::new();
    let mut phases = Vec::new();
    let mut cursor = 0usize;
    let mut cur = start.xy();
    let mut pending_slot: Option<(String, [T; 2])> = None;

    for (k, action) in skeleton.actions.iter().enumerate() {
        let len = if k == 0 {
            first - tau
        } else {
            skeleton.phase_durations[k]
        };
        let end = (len > 0).then(|| cursor + len - 1);
        let location = |i: usize| -> Result<&str, TrajoptError> {
            action
                .arg(i)
                .ok_or_else(|| TrajoptError::InvalidSkeleton(action.to_string()))
        };
        let disc = |loc: &str| -> Result<([T; 2], T), TrajoptError> {
            let sf = x
                .surface(loc)
                .map_err(|_| TrajoptError::UnknownLocation(loc.to_string()))?;
            Ok((sf.center, sf.radius - params.location_margin))
        };
        let keyframe;
        match action.name.as_str() {
            "move" => {
                let loc = location(0)?;
                let (center, radius) = disc(loc)?;
                keyframe = match skeleton.actions.get(k + 1) {
                    Some(next) if next.name == "pick" && next.arg(1) == Some(loc) => {
                        let obj = next.arg(0).unwrap_or_default();
                        match resting.iter().find(|(o, _)| o == obj).and_then(|(_, r)| r.clone()) {
                            Some((s, p)) if s == loc => to_base(p),
                            _ => center,
                        }
                    }
                    Some(next) if next.name == "place" && next.arg(1) == Some(loc) => {
                        let p = slot(&resting, loc)?;
                        pending_slot = Some((loc.to_string(), p));
                        to_base(p)
                    }
                    _ => center,
                };
                if let Some(e) = end {
                    constraints.push(Constraint {
                        step: e,
                        anchor: Anchor::Base,
                        kind: ConstraintKind::Within { center, radius },
                        tag: Tag::Location,
                    });
                }
            }
            "pick" => {
                let obj = location(0)?;
                let loc = location(1)?;
                let (center, radius) = disc(loc)?;
                let entry = resting
                    .iter_mut()
                    .find(|(o, _)| o == obj)
                    .ok_or_else(|| TrajoptError::InvalidSkeleton(action.to_string()))?;
                let p = match entry.1.take() {
                    Some((s, p)) if s == loc => p,
                    _ => return Err(TrajoptError::InvalidSkeleton(action.to_string())),
                };
                keyframe = to_base(p);
                for i in cursor..cursor + len {
                    constraints.push(Constraint {
                        step: i,
                        anchor: Anchor::Base,
                        kind: ConstraintKind::Within { center, radius },
                        tag: Tag::Location,
                    });
                }
                if let Some(e) = end {
                    constraints.push(Constraint {
                        step: e,
                        anchor: Anchor::Gripper,
                        kind: ConstraintKind::Reach { target: p },
                        tag: Tag::Grasp,
                    });
                }
            }
            "place" => {
                let obj = location(0)?;
                let loc = location(1)?;
                let (center, radius) = disc(loc)?;
                let sf = x
                    .surface(loc)
                    .map_err(|_| TrajoptError::UnknownLocation(loc.to_string()))?;
                let p = match pending_slot.take() {
                    Some((s, p)) if s == loc => p,
                    _ => slot(&resting, loc)?,
                };
                keyframe = to_base(p);
                for i in cursor..cursor + len {
                    constraints.push(Constraint {
                        step: i,
                        anchor: Anchor::Base,
                        kind: ConstraintKind::Within { center, radius },
                        tag: Tag::Location,
                    });
                }
                if let Some(e) = end {
                    let (lo, hi) = sf.bounds(params.place_margin);
                    constraints.push(Constraint {
                        step: e,
                        anchor: Anchor::Gripper,
                        kind: ConstraintKind::Inside { lo, hi },
                        tag: Tag::Placement,
                    });
                    for c in occupied(&resting, loc) {
                        constraints.push(Constraint {
                            step: e,
                            anchor: Anchor::Gripper,
                            kind: ConstraintKind::Clearance {
                                center: c,
                                radius: params.object_clearance,
                            },
                            tag: Tag::ObjectClearance,
                        });
                    }
                }
                if let Some(entry) = resting.iter_mut().find(|(o, _)| o == obj) {
                    entry.1 = Some((loc.to_string(), p));
                }
            }
            _ => keyframe = cur,
        }
        phases.push(Phase {
            action: action.clone(),
            first: cursor,
            len,
            keyframe,
        });
        if len > 0 {
            cur = keyframe;
        }
        cursor += len;
    }
    let steps = cursor;
    if steps == 0 {
        return Err(TrajoptError::EmptySkeleton);
    }
    if !human.is_empty() {
        for i in 0..steps {
            let h = human[(i + 1).min(human.len() - 1)];
            constraints.push(Constraint {
                step: i,
                anchor: Anchor::Base,
                kind: ConstraintKind::Clearance {
                    center: h.pelvis,
                    radius: params.r_safe,
                },
                tag: Tag::Human,
            });
        }
    }
    constraints.sort_by_key(|c| c.step);
    Ok(NlpProblem {
        start,
        prev: None,
        steps,
        params: params.clone(),
        gripper_offset: offset,
        constraints,
        phases,
    })
}
