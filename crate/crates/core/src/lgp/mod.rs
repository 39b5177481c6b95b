//! Single planning and the receding-horizon replanning loop.

mod run;

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{deduce_state, GeometricState, HumanConfig, Pose2};
use crate::pddl::{ground_actions, Atom, Domain, GroundedAction};
use crate::symbolic::{
    applicable, exec, rank_skeletons, search_skeletons, SearchConfig, SearchOutcome, Skeleton, SymbolicState,
};
use crate::trajopt::{build_nlp, solve, NlpParams, NlpProblem, SolverConfig, TrajectorySolution};

pub use run::{
    run, write_trajectory_csv, ExecutedStep, Mode, ReplanReason, RunReport, TriggerOutcome, TriggerRecord,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LgpError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("no skeleton found: {0}")]
    NoSkeleton(String),
    #[error("all {tried} candidate NLPs failed to converge")]
    AllInfeasible { tried: usize },
}

#[derive(Clone, Debug)]
pub struct LgpConfig {
    pub search: SearchConfig,
    pub nlp: NlpParams<f64>,
    pub solver: SolverConfig<f64>,
    /// Steps between feasibility checks.
    pub trigger_period: usize,
    /// Run length limit; `None` means 4 × max(human trajectory length, 100).
    pub timeout: Option<usize>,
    /// Ranked skeletons whose NLP is attempted per plan.
    pub max_nlp_attempts: usize,
    /// Extra distance beyond `r_safe` used by the execution safety filter.
    pub safety_margin: f64,
}

impl Default for LgpConfig {
    fn default() -> Self {
        LgpConfig {
            search: SearchConfig::default(),
            nlp: NlpParams::default(),
            solver: SolverConfig::default(),
            trigger_period: 10,
            timeout: None,
            max_nlp_attempts: 10,
            safety_margin: 1e-3,
        }
    }
}

/// Domain, grounded actions, goal and planner settings.
#[derive(Clone, Debug)]
pub struct LgpInstance {
    pub domain: Domain,
    pub actions: Vec<GroundedAction>,
    pub goal: BTreeSet<Atom>,
    pub config: LgpConfig,
}

impl LgpInstance {
    pub fn new(domain: Domain, goal: BTreeSet<Atom>, config: LgpConfig) -> Result<Self, LgpError> {
        if config.trigger_period == 0 {
            return Err(LgpError::InvalidInstance("trigger period must be at least 1".into()));
        }
        if let Some(bad) = goal.iter().find(|a| !domain.validates(a)) {
            return Err(LgpError::InvalidInstance(format!("goal proposition {bad} not valid in domain")));
        }
        let actions = ground_actions(&domain);
        Ok(LgpInstance { domain, actions, goal, config })
    }
}

/// A skeleton with its NLP and solution. The first phase of `problem` may be
/// truncated by `tau0` steps.
#[derive(Clone, Debug)]
pub struct Plan {
    pub skeleton: Skeleton,
    pub tau0: usize,
    pub problem: NlpProblem<f64>,
    pub solution: TrajectorySolution<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    /// Search plus ranking wall time, seconds.
    pub symbolic_time: f64,
    /// NLP solve wall time, seconds.
    pub nlp_time: f64,
    pub solved_nlps: usize,
    pub ties: usize,
}

#[derive(Clone, Debug)]
pub enum PlanOutcome {
    AlreadySatisfied,
    Planned(Plan),
}

/// The goal minus placements of objects the human is carrying; those are left to the human.
pub fn effective_goal(goal: &BTreeSet<Atom>, s: &SymbolicState) -> BTreeSet<Atom> {
    let held: BTreeSet<&str> = s.with_predicate("human-carry").filter_map(|a| a.args.first()).map(String::as_str).collect();
    goal.iter()
        .filter(|a| !(a.predicate == "on" && a.args.first().is_some_and(|o| held.contains(o.as_str()))))
        .cloned()
        .collect()
}

/// Deduce, search tie-shortest skeletons, rank them and solve NLPs in rank order.
///
/// `human[k]` is the predicted human configuration `k` steps from now.
pub fn plan_single(
    inst: &LgpInstance,
    x: &GeometricState<f64>,
    human: &[HumanConfig<f64>],
    prev: Option<Pose2<f64>>,
    stats: &mut PlanStats,
) -> Result<PlanOutcome, LgpError> {
    let s0 = deduce_state(x, &inst.domain);
    if s0.satisfies(&inst.goal) {
        return Ok(PlanOutcome::AlreadySatisfied);
    }
    let goal = effective_goal(&inst.goal, &s0);
    if s0.satisfies(&goal) {
        return Err(LgpError::NoSkeleton("remaining goal objects are held by the human".into()));
    }
    let t0 = Instant::now();
    let found = search_skeletons(&s0, &goal, &inst.actions, &inst.config.search)
        .map_err(|e| LgpError::NoSkeleton(e.to_string()))?;
    let skeletons = match found {
        SearchOutcome::AlreadySatisfied => return Ok(PlanOutcome::AlreadySatisfied),
        SearchOutcome::Found(s) => s,
    };
    stats.ties = skeletons.len();
    let ranked = rank_skeletons(skeletons, x, &inst.config.nlp);
    stats.symbolic_time += t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut tried = 0;
    for sk in ranked.iter().filter(|s| s.cost.is_finite()).take(inst.config.max_nlp_attempts) {
        tried += 1;
        let Ok(mut problem) = build_nlp(sk, x, human, 0, &inst.config.nlp) else {
            continue;
        };
        problem.prev = prev;
        let Ok(solution) = solve(&problem, &inst.config.solver, None) else {
            continue;
        };
        stats.solved_nlps += 1;
        if solution.converged {
            stats.nlp_time += t1.elapsed().as_secs_f64();
            return Ok(PlanOutcome::Planned(Plan {
                skeleton: sk.clone(),
                tau0: 0,
                problem,
                solution,
            }));
        }
        log::debug!("skeleton rejected: {}", sk.describe());
    }
    stats.nlp_time += t1.elapsed().as_secs_f64();
    Err(LgpError::AllInfeasible { tried })
}

/// Whether the skeleton suffix is applicable from `s` and reaches the effective goal.
pub fn suffix_applicable(inst: &LgpInstance, suffix: &[GroundedAction], s: &SymbolicState) -> bool {
    let goal = effective_goal(&inst.goal, s);
    let mut cur = s.clone();
    for a in suffix {
        if !applicable(&cur, a) {
            return false;
        }
        cur = match exec(&cur, a) {
            Ok(n) => n,
            Err(_) => return false,
        };
    }
    cur.satisfies(&goal)
}

/// Result of the two-part skeleton feasibility test.
#[derive(Clone, Debug)]
pub enum Feasibility {
    /// Still feasible; carries the re-optimized remainder.
    Feasible(Plan),
    SymbolicInvalid,
    GeometricInfeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Tests `skeleton` from action `k`, `tau` steps into it, against the current
/// state. The truncated NLP is warm-started from `warm` when its length fits.
#[allow(clippy::too_many_arguments)]
pub fn check_feasibility(
    inst: &LgpInstance,
    skeleton: &Skeleton,
    k: usize,
    tau: usize,
    x: &GeometricState<f64>,
    s: &SymbolicState,
    human: &[HumanConfig<f64>],
    prev: Option<Pose2<f64>>,
    warm: Option<&[Pose2<f64>]>,
) -> Feasibility {
    if k >= skeleton.len() {
        return Feasibility::SymbolicInvalid;
    }
    let suffix = skeleton.suffix(k);
    if !suffix_applicable(inst, &suffix.actions, s) {
        return Feasibility::SymbolicInvalid;
    }
    let Ok(mut problem) = build_nlp(&suffix, x, human, tau, &inst.config.nlp) else {
        return Feasibility::GeometricInfeasible;
    };
    problem.prev = prev;
    let warm = warm.filter(|w| w.len() == problem.steps);
    match solve(&problem, &inst.config.solver, warm) {
        Ok(solution) if solution.converged => Feasibility::Feasible(Plan {
            skeleton: suffix,
            tau0: tau,
            problem,
            solution,
        }),
        _ => Feasibility::GeometricInfeasible,
    }
}
