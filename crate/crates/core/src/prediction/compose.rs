use serde::{Deserialize, Serialize};

use super::irl::{rollout_policy, IrlModel, ROLLOUT_CAP};
use super::lowlevel::{generate_lowlevel, MotionLimits, SegmentKind};
use super::mdp::{HighLevelAction, HighLevelState, Mdp};
use super::trajectory::{HumanEvent, HumanSample, HumanTrajectory};
use super::PredictionError;
use crate::kinematics::{dist2, GeometricState, Holder, Surface};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposeConfig {
    pub go_to_steps: usize,
    pub pick_steps: usize,
    pub place_steps: usize,
    /// Distance of a standing point from the surface edge.
    pub standing_offset: f64,
    /// Minimum distance of a placement from resting objects.
    pub clearance: f64,
    /// Placements stay this far inside the surface rectangle.
    pub place_margin: f64,
    pub limits: MotionLimits<f64>,
    pub rollout_cap: usize,
}

impl Default for ComposeConfig {
    fn default() -> Self {
        ComposeConfig {
            go_to_steps: 30,
            pick_steps: 5,
            place_steps: 5,
            standing_offset: 0.3,
            clearance: 0.15,
            place_margin: 0.05,
            limits: MotionLimits::default(),
            rollout_cap: ROLLOUT_CAP,
        }
    }
}

/// Target of one high-level action.
#[derive(Clone, Debug, PartialEq)]
pub struct GoalPoint {
    pub point: [f64; 3],
    /// The object picked, for pick-up.
    pub object: Option<String>,
}

/// Surface nearest the human pelvis.
pub fn human_location<'a>(x: &'a GeometricState<f64>) -> Option<&'a Surface<f64>> {
    let p = x.human().pelvis;
    x.surfaces()
        .iter()
        .min_by(|a, b| a.distance(p).total_cmp(&b.distance(p)))
}

/// Abstracts the workspace into the MDP state; objects outside every class are ignored.
pub fn high_level_state(mdp: &Mdp, x: &GeometricState<f64>) -> Result<HighLevelState, PredictionError> {
    let mut counts = vec![0u8; mdp.slots.len()];
    let mut carry = 0;
    for (c, class) in mdp.classes.iter().enumerate() {
        for o in &class.objects {
            match x.holder(o)? {
                Holder::Surface(s) => {
                    let l = mdp
                        .locations
                        .iter()
                        .position(|n| *n == s)
                        .ok_or_else(|| PredictionError::UnknownName(format!("location `{s}`")))?;
                    let slot = mdp
                        .slot_of(c, l)
                        .ok_or_else(|| PredictionError::UnknownName(format!("slot {}@{s}", class.name)))?;
                    counts[slot] += 1;
                }
                Holder::Human => carry = c + 1,
                Holder::Robot => return Err(PredictionError::InvalidState(format!("{o} held by robot"))),
            }
        }
    }
    let loc = human_location(x).ok_or_else(|| PredictionError::UnknownName("surface".to_string()))?;
    let human = mdp
        .locations
        .iter()
        .position(|n| *n == loc.name)
        .ok_or_else(|| PredictionError::UnknownName(format!("location `{}`", loc.name)))?;
    let s = HighLevelState { counts, human, carry };
    mdp.check_consistent(&s)?;
    Ok(s)
}

/// Goal point of `action` in the workspace `x`.
pub fn extract_goal(
    action: HighLevelAction,
    mdp: &Mdp,
    x: &GeometricState<f64>,
    cfg: &ComposeConfig,
) -> Result<GoalPoint, PredictionError> {
    let pelvis = x.human().pelvis;
    let here = || human_location(x).ok_or_else(|| PredictionError::UnknownName("surface".to_string()));
    match action {
        HighLevelAction::GoTo(l) => {
            let sf = x.surface(&mdp.locations[l])?;
            let p = sf.standing_point(pelvis, cfg.standing_offset);
            Ok(GoalPoint { point: [p[0], p[1], 0.0], object: None })
        }
        HighLevelAction::PickUp(c) => {
            let sf = here()?;
            let mut best: Option<(f64, &String)> = None;
            for o in &mdp.classes[c].objects {
                if matches!(x.holder(o)?, Holder::Surface(s) if s == sf.name) {
                    let d = dist2(x.object_world(o)?.xy(), pelvis);
                    if best.map_or(true, |(b, _)| d < b) {
                        best = Some((d, o));
                    }
                }
            }
            let (_, o) = best.ok_or_else(|| {
                PredictionError::InvalidState(format!("no {} on {}", mdp.classes[c].name, sf.name))
            })?;
            Ok(GoalPoint { point: x.object_world(o)?.xyz(), object: Some(o.clone()) })
        }
        HighLevelAction::Place => {
            let sf = here()?;
            let p = sf
                .closest_free_point(pelvis, &x.occupied(&sf.name, &[]), cfg.clearance, cfg.place_margin)
                .ok_or_else(|| PredictionError::SurfaceFull(sf.name.clone()))?;
            Ok(GoalPoint { point: [p[0], p[1], sf.height], object: None })
        }
    }
}

/// Hierarchical prediction: high-level actions, the goals they target, the
/// concatenated motion and the human's pick/place schedule.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComposedPrediction {
    pub actions: Vec<HighLevelAction>,
    pub goals: Vec<[f64; 3]>,
    pub trajectory: HumanTrajectory,
    pub events: Vec<HumanEvent>,
}

/// Rolls out the policy from `s0` until the MDP goal holds and turns each
/// action into a motion segment in `workspace`.
pub fn compose_prediction(
    model: &IrlModel,
    s0: &HighLevelState,
    workspace: &GeometricState<f64>,
    seed: u64,
    cfg: &ComposeConfig,
) -> Result<ComposedPrediction, PredictionError> {
    let mdp = &model.mdp;
    let goal = |s: &HighLevelState| mdp.is_goal(s);
    let actions = rollout_policy(model, s0, &goal, seed, cfg.rollout_cap)?;
    compose_actions(mdp, &actions, workspace, cfg)
}

/// Turns a fixed action sequence into motion; used for rollouts and scripted humans.
pub fn compose_actions(
    mdp: &Mdp,
    actions: &[HighLevelAction],
    workspace: &GeometricState<f64>,
    cfg: &ComposeConfig,
) -> Result<ComposedPrediction, PredictionError> {
    if actions.is_empty() {
        return Ok(ComposedPrediction::default());
    }
    let mut sim = workspace.clone();
    let mut carried = sim.human_carried().first().map(|s| s.to_string());
    let mut samples = vec![HumanSample { config: sim.human(), carried: carried.clone() }];
    let mut goals = Vec::new();
    for &a in actions {
        let g = extract_goal(a, mdp, &sim, cfg)?;
        let (kind, steps) = match a {
            HighLevelAction::GoTo(_) => (SegmentKind::Pelvis, cfg.go_to_steps),
            HighLevelAction::PickUp(_) => (SegmentKind::Hand, cfg.pick_steps),
            HighLevelAction::Place => (SegmentKind::Hand, cfg.place_steps),
        };
        let seg = generate_lowlevel(&sim.human(), g.point, kind, steps, &cfg.limits);
        let last = *seg.last().expect("nonempty segment");
        for h in &seg[..seg.len() - 1] {
            samples.push(HumanSample { config: *h, carried: carried.clone() });
        }
        sim.set_human(last);
        match a {
            HighLevelAction::PickUp(_) => {
                let o = g.object.clone().expect("pick-up names an object");
                sim.human_pick(&o)?;
                carried = Some(o);
            }
            HighLevelAction::Place => {
                if let Some(o) = carried.take() {
                    sim.human_place(&o)?;
                }
            }
            HighLevelAction::GoTo(_) => {}
        }
        samples.push(HumanSample { config: last, carried: carried.clone() });
        goals.push(g.point);
    }
    let trajectory = HumanTrajectory { samples };
    let events = trajectory.events();
    Ok(ComposedPrediction {
        actions: actions.to_vec(),
        goals,
        trajectory,
        events,
    })
}
