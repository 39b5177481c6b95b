use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_feasibility, plan_single, Feasibility, LgpInstance, Plan, PlanOutcome, PlanStats};
use crate::kinematics::{apply_switch, deduce_state, dist2, GeometricState, Holder, Pose2};
use crate::prediction::HumanSource;

/// Horizon floor for the default timeout.
const MIN_HORIZON: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Plan once at the start and execute open loop.
    Single,
    /// Check feasibility every trigger period and replan when needed.
    Dynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplanReason {
    Initial,
    SymbolicInvalid,
    GeometricInfeasible,
    /// No active plan: the previous one finished, failed to switch, or was never found.
    Retry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriggerOutcome {
    /// Current skeleton still feasible; its remainder was re-optimized.
    Refined,
    Replanned,
    /// The goal already holds.
    Satisfied,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerRecord {
    pub t: usize,
    pub reason: Option<ReplanReason>,
    pub outcome: TriggerOutcome,
    pub skeleton: String,
    pub skeleton_len: usize,
    pub symbolic_time: f64,
    pub nlp_time: f64,
    pub solved_nlps: usize,
    /// Steps of the current skeleton executed since it was planned.
    pub executed: usize,
    /// Steps left in the current NLP.
    pub remaining: usize,
    /// Total duration of the skeleton when planned.
    pub total: usize,
    /// Fraction of goal propositions satisfied at this trigger.
    pub progress: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutedStep {
    pub t: usize,
    pub robot: Pose2<f64>,
    pub human: [f64; 2],
    pub carried: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub success: bool,
    pub failure: Option<String>,
    /// Step at which the run ended.
    pub steps: usize,
    pub timeout: usize,
    pub triggers: Vec<TriggerRecord>,
    #[serde(skip)]
    pub trajectory: Vec<ExecutedStep>,
    pub robot_path_length: f64,
    /// Path length of the first plan's trajectory.
    pub planned_path_length: Option<f64>,
    pub replan_count: usize,
    pub replan_failures: usize,
    pub safety_interventions: usize,
    pub min_clearance: f64,
    /// Objects the robot picked.
    pub robot_moved: BTreeSet<String>,
    /// Objects the human picked.
    pub human_moved: BTreeSet<String>,
    /// Wall time spent planning while the world was paused, seconds.
    pub plan_time: f64,
}

impl RunReport {
    pub fn symbolic_times(&self) -> Vec<f64> {
        self.triggers
            .iter()
            .filter(|r| r.outcome == TriggerOutcome::Replanned || r.outcome == TriggerOutcome::Failed)
            .filter(|r| r.reason.is_some())
            .map(|r| r.symbolic_time)
            .collect()
    }

    pub fn solved_nlps(&self) -> usize {
        self.triggers.iter().map(|r| r.solved_nlps).sum()
    }
}

/// Writes `t,robot_x,robot_y,robot_phi,human_x,human_y,carried`.
pub fn write_trajectory_csv<W: Write>(report: &RunReport, w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "robot_x", "robot_y", "robot_phi", "human_x", "human_y", "carried"])?;
    for s in &report.trajectory {
        wr.write_record([
            s.t.to_string(),
            format!("{:.6}", s.robot.x),
            format!("{:.6}", s.robot.y),
            format!("{:.6}", s.robot.phi),
            format!("{:.6}", s.human[0]),
            format!("{:.6}", s.human[1]),
            s.carried.clone().unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Plan under execution.
struct Active {
    plan: Plan,
    /// Current action within `plan.skeleton`.
    k: usize,
    /// Steps elapsed in the current action.
    tau: usize,
    /// Next waypoint of `plan.solution`.
    cursor: usize,
    executed: usize,
    total: usize,
}

impl Active {
    fn new(plan: Plan) -> Self {
        let total = plan.skeleton.total_duration();
        Active { plan, k: 0, tau: 0, cursor: 0, executed: 0, total }
    }

    fn remaining(&self) -> usize {
        self.plan.problem.steps - self.cursor
    }

    /// Replaces the plan by a re-optimized remainder starting at the current action.
    fn refine(&mut self, plan: Plan) {
        self.plan = plan;
        self.k = 0;
        self.cursor = 0;
    }
}

fn progress(inst: &LgpInstance, x: &GeometricState<f64>) -> f64 {
    if inst.goal.is_empty() {
        return 1.0;
    }
    let s = deduce_state(x, &inst.domain);
    inst.goal.iter().filter(|a| s.contains(a)).count() as f64 / inst.goal.len() as f64
}

/// Executes one run in `mode` against the human `source`.
///
/// The world is paused while planning. Robot switches apply atomically at
/// phase ends. A safety filter keeps the robot `r_safe + safety_margin` away
/// from the actual human pelvis.
pub fn run(inst: &LgpInstance, x0: &GeometricState<f64>, source: &HumanSource, mode: Mode) -> RunReport {
    let cfg = &inst.config;
    let actual = &source.actual;
    let timeout = cfg.timeout.unwrap_or(4 * actual.len().max(MIN_HORIZON));
    let mut x = x0.clone();
    if let Some(h) = actual.at(0) {
        x.set_human(h.config);
    }
    let mut report = RunReport {
        mode,
        success: false,
        failure: None,
        steps: 0,
        timeout,
        triggers: Vec::new(),
        trajectory: Vec::new(),
        robot_path_length: 0.0,
        planned_path_length: None,
        replan_count: 0,
        replan_failures: 0,
        safety_interventions: 0,
        min_clearance: f64::INFINITY,
        robot_moved: BTreeSet::new(),
        human_moved: BTreeSet::new(),
        plan_time: 0.0,
    };
    let mut active: Option<Active> = None;
    let mut prev: Option<Pose2<f64>> = None;
    let mut force: Option<ReplanReason> = None;
    let mut planned_once = false;
    let r_safe = cfg.nlp.r_safe;
    report.trajectory.push(ExecutedStep {
        t: 0,
        robot: x.robot(),
        human: x.human().pelvis,
        carried: x.robot_carried().map(str::to_string),
    });
    report.min_clearance = dist2(x.robot().xy(), x.human().pelvis);
    let mut t = 0;
    loop {
        if deduce_state(&x, &inst.domain).satisfies(&inst.goal) {
            report.success = true;
            break;
        }
        if t >= timeout {
            report.failure = Some("timeout".into());
            break;
        }
        let trigger = match mode {
            Mode::Dynamic => t % cfg.trigger_period == 0 || force.is_some(),
            Mode::Single => !planned_once,
        };
        if trigger {
            let clock = Instant::now();
            let human = source.predicted.configs_from(t);
            let s = deduce_state(&x, &inst.domain);
            let mut stats = PlanStats::default();
            let mut reason = if !planned_once { Some(ReplanReason::Initial) } else { force.take() };
            force = None;
            if reason.is_none() {
                match &mut active {
                    None => reason = Some(ReplanReason::Retry),
                    Some(a) => {
                        let nlp_clock = Instant::now();
                        let warm = &a.plan.solution.waypoints[a.cursor..];
                        let f = check_feasibility(inst, &a.plan.skeleton, a.k, a.tau, &x, &s, &human, prev, Some(warm));
                        stats.nlp_time += nlp_clock.elapsed().as_secs_f64();
                        stats.solved_nlps += 1;
                        match f {
                            Feasibility::Feasible(plan) => a.refine(plan),
                            Feasibility::SymbolicInvalid => reason = Some(ReplanReason::SymbolicInvalid),
                            Feasibility::GeometricInfeasible => reason = Some(ReplanReason::GeometricInfeasible),
                        }
                    }
                }
            }
            let outcome = match reason {
                None => TriggerOutcome::Refined,
                Some(r) => {
                    planned_once = true;
                    if matches!(r, ReplanReason::SymbolicInvalid | ReplanReason::GeometricInfeasible) {
                        report.replan_count += 1;
                    }
                    active = None;
                    match plan_single(inst, &x, &human, prev, &mut stats) {
                        Ok(PlanOutcome::Planned(plan)) => {
                            if report.planned_path_length.is_none() {
                                report.planned_path_length = Some(plan.solution.path_length(x.robot()));
                            }
                            active = Some(Active::new(plan));
                            TriggerOutcome::Replanned
                        }
                        Ok(PlanOutcome::AlreadySatisfied) => TriggerOutcome::Satisfied,
                        Err(e) => {
                            log::debug!("t={t}: planning failed: {e}");
                            report.replan_failures += 1;
                            if mode == Mode::Single {
                                report.failure = Some(e.to_string());
                            }
                            TriggerOutcome::Failed
                        }
                    }
                }
            };
            let (skeleton, skeleton_len, executed, remaining, total) = match &active {
                Some(a) => (
                    a.plan.skeleton.suffix(a.k).describe(),
                    a.plan.skeleton.len() - a.k,
                    a.executed,
                    a.remaining(),
                    a.total,
                ),
                None => (String::new(), 0, 0, 0, 0),
            };
            report.triggers.push(TriggerRecord {
                t,
                reason,
                outcome,
                skeleton,
                skeleton_len,
                symbolic_time: stats.symbolic_time,
                nlp_time: stats.nlp_time,
                solved_nlps: stats.solved_nlps,
                executed,
                remaining,
                total,
                progress: progress(inst, &x),
            });
            report.plan_time += clock.elapsed().as_secs_f64();
            if report.failure.is_some() {
                break;
            }
        }

        // Robot step.
        let before = x.robot();
        let mut pose = before;
        if let Some(a) = &mut active {
            if a.cursor < a.plan.solution.waypoints.len() {
                pose = a.plan.solution.waypoints[a.cursor];
                a.cursor += 1;
                a.tau += 1;
                a.executed += 1;
            }
        }

        // Human step and events.
        let prev_sample = actual.at(t).cloned();
        let sample = actual.at(t + 1).cloned();
        if let Some(h) = &sample {
            x.set_human(h.config);
        }
        if let (Some(p), Some(n)) = (&prev_sample, &sample) {
            if p.carried != n.carried {
                if let Some(o) = &p.carried {
                    if matches!(x.holder(o), Ok(Holder::Human)) {
                        if let Err(e) = x.human_place(o) {
                            log::debug!("t={t}: human place of {o} ignored: {e}");
                        }
                    }
                }
                if let Some(o) = &n.carried {
                    match x.human_pick(o) {
                        Ok(()) => {
                            report.human_moved.insert(o.clone());
                        }
                        Err(e) => log::debug!("t={t}: human pick of {o} ignored: {e}"),
                    }
                }
            }
        }

        // Safety filter against the actual human.
        let pelvis = x.human().pelvis;
        let d = dist2(pose.xy(), pelvis);
        if d < r_safe {
            let target = r_safe + cfg.safety_margin;
            let dir = if d > 1e-9 {
                [(pose.x - pelvis[0]) / d, (pose.y - pelvis[1]) / d]
            } else {
                let b = dist2(before.xy(), pelvis);
                if b > 1e-9 {
                    [(before.x - pelvis[0]) / b, (before.y - pelvis[1]) / b]
                } else {
                    [1.0, 0.0]
                }
            };
            pose = Pose2::new(pelvis[0] + target * dir[0], pelvis[1] + target * dir[1], pose.phi);
            report.safety_interventions += 1;
        }
        x.set_robot(pose);
        report.min_clearance = report.min_clearance.min(dist2(pose.xy(), pelvis));
        report.robot_path_length += dist2(before.xy(), pose.xy());
        prev = Some(before);

        // Switch at the phase end.
        let mut finished = false;
        if let Some(a) = &mut active {
            if a.k < a.plan.skeleton.len() && a.tau >= a.plan.skeleton.phase_durations[a.k] {
                let action = a.plan.skeleton.actions[a.k].clone();
                match apply_switch(&x, &action) {
                    Ok(next) => {
                        x = next;
                        if action.name == "pick" {
                            if let Some(o) = action.arg(0) {
                                report.robot_moved.insert(o.to_string());
                            }
                        }
                        a.k += 1;
                        a.tau = 0;
                        finished = a.k >= a.plan.skeleton.len();
                    }
                    Err(e) => {
                        log::debug!("t={t}: switch {action} failed: {e}");
                        finished = true;
                        match mode {
                            Mode::Single => report.failure = Some(format!("switch {action} failed: {e}")),
                            Mode::Dynamic => force = Some(ReplanReason::GeometricInfeasible),
                        }
                    }
                }
            }
        }
        if finished {
            active = None;
        }

        report.trajectory.push(ExecutedStep {
            t: t + 1,
            robot: pose,
            human: pelvis,
            carried: x.robot_carried().map(str::to_string),
        });
        t += 1;
        if report.failure.is_some() {
            break;
        }
    }
    report.steps = t;
    report
}
