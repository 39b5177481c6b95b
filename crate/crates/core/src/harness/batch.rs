use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{human_alone_steps, Scenario};
use super::HarnessError;
use crate::lgp::{run, Mode, RunReport, TriggerOutcome};

/// Simulation step length, seconds.
const DT: f64 = 0.1;

/// One row of `runs.csv`. Only deterministic quantities live here; wall times
/// stay in the attached [`RunReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub seed: u64,
    pub mode: Mode,
    pub success: bool,
    pub steps: usize,
    pub timeout: usize,
    pub initial_skeleton_len: usize,
    pub replan_count: usize,
    pub replan_failures: usize,
    pub solved_nlps: usize,
    pub robot_path_length: f64,
    pub planned_path_length: Option<f64>,
    pub path_ratio: Option<f64>,
    pub task_iou: f64,
    pub human_alone_steps: Option<usize>,
    /// Human-alone duration over collaborative duration, on success.
    pub task_time_reduction: Option<f64>,
    pub min_clearance: f64,
    pub safety_interventions: usize,
    /// `;`-separated object names.
    pub robot_moved: String,
    pub human_moved: String,
    pub failure: String,
}

#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub record: RunRecord,
    /// `None` when the run could not be set up.
    pub report: Option<RunReport>,
}

impl ScenarioRun {
    /// Mean symbolic plan time over replans, seconds.
    pub fn symbolic_time(&self) -> Option<f64> {
        let t = self.report.as_ref()?.symbolic_times();
        (!t.is_empty()).then(|| t.iter().sum::<f64>() / t.len() as f64)
    }

    /// Total planning wall time, seconds.
    pub fn solution_time(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.plan_time)
    }

    /// Task time reduction counting paused planning time as elapsed time.
    pub fn task_time_reduction_with_pause(&self) -> Option<f64> {
        let r = self.report.as_ref()?;
        let alone = self.record.human_alone_steps? as f64 * DT;
        r.success.then(|| alone / (r.steps as f64 * DT + r.plan_time))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
}

impl BatchConfig {
    pub fn with_seeds(seeds: Vec<u64>) -> Self {
        BatchConfig { seeds, modes: vec![Mode::Single, Mode::Dynamic] }
    }
}

#[derive(Clone, Debug, Default)]
pub struct MetricsTable {
    pub runs: Vec<ScenarioRun>,
}

impl MetricsTable {
    pub fn records(&self) -> Vec<RunRecord> {
        self.runs.iter().map(|r| r.record.clone()).collect()
    }

    pub fn mode(&self, mode: Mode) -> impl Iterator<Item = &ScenarioRun> {
        self.runs.iter().filter(move |r| r.record.mode == mode)
    }
}

/// Intersection over union of the two object sets; 0 when both are empty.
pub fn task_iou(human: &BTreeSet<String>, robot: &BTreeSet<String>) -> f64 {
    let union = human.union(robot).count();
    if union == 0 {
        return 0.0;
    }
    human.intersection(robot).count() as f64 / union as f64
}

fn join(set: &BTreeSet<String>) -> String {
    set.iter().cloned().collect::<Vec<_>>().join(";")
}

fn failed_record(scenario: &Scenario, seed: u64, mode: Mode, err: &HarnessError) -> ScenarioRun {
    ScenarioRun {
        record: RunRecord {
            scenario: scenario.name().to_string(),
            seed,
            mode,
            success: false,
            steps: 0,
            timeout: 0,
            initial_skeleton_len: 0,
            replan_count: 0,
            replan_failures: 0,
            solved_nlps: 0,
            robot_path_length: 0.0,
            planned_path_length: None,
            path_ratio: None,
            task_iou: 0.0,
            human_alone_steps: None,
            task_time_reduction: None,
            min_clearance: f64::INFINITY,
            safety_interventions: 0,
            robot_moved: String::new(),
            human_moved: String::new(),
            failure: err.to_string(),
        },
        report: None,
    }
}

fn record(scenario: &Scenario, seed: u64, report: RunReport, alone: Option<usize>, baseline: Option<f64>) -> ScenarioRun {
    let path_ratio = match report.mode {
        Mode::Single => Some(1.0),
        Mode::Dynamic => baseline.filter(|b| *b > 0.0).map(|b| report.robot_path_length / b),
    };
    let initial_skeleton_len = report
        .triggers
        .iter()
        .find(|r| r.outcome == TriggerOutcome::Replanned)
        .map_or(0, |r| r.skeleton_len);
    let task_time_reduction = match (report.success, alone) {
        (true, Some(a)) if report.steps > 0 => Some(a as f64 / report.steps as f64),
        _ => None,
    };
    ScenarioRun {
        record: RunRecord {
            scenario: scenario.name().to_string(),
            seed,
            mode: report.mode,
            success: report.success,
            steps: report.steps,
            timeout: report.timeout,
            initial_skeleton_len,
            replan_count: report.replan_count,
            replan_failures: report.replan_failures,
            solved_nlps: report.solved_nlps(),
            robot_path_length: report.robot_path_length,
            planned_path_length: report.planned_path_length,
            path_ratio,
            task_iou: task_iou(&report.human_moved, &report.robot_moved),
            human_alone_steps: alone,
            task_time_reduction,
            min_clearance: report.min_clearance,
            safety_interventions: report.safety_interventions,
            robot_moved: join(&report.robot_moved),
            human_moved: join(&report.human_moved),
            failure: report.failure.clone().unwrap_or_default(),
        },
        report: Some(report),
    }
}

/// Runs `scenario` with human seed `seed` in each of `modes`. The dynamic path
/// ratio uses the single run's planned length as baseline, so single always runs.
pub fn run_scenario(scenario: &Scenario, seed: u64, modes: &[Mode]) -> Vec<ScenarioRun> {
    let setup = scenario.instance().and_then(|inst| Ok((inst, scenario.human_source(seed)?)));
    let (inst, source) = match setup {
        Ok(v) => v,
        Err(e) => return modes.iter().map(|&m| failed_record(scenario, seed, m, &e)).collect(),
    };
    let alone = human_alone_steps(&source);
    let single = run(&inst, &scenario.workspace, &source, Mode::Single);
    let baseline = single.planned_path_length;
    let mut out = Vec::new();
    for &m in modes {
        let report = match m {
            Mode::Single => single.clone(),
            Mode::Dynamic => run(&inst, &scenario.workspace, &source, m),
        };
        log::info!(
            "{} seed {seed} {:?}: success {} in {} steps",
            scenario.name(),
            m,
            report.success,
            report.steps
        );
        out.push(record(scenario, seed, report, alone, baseline));
    }
    out
}

/// Runs every scenario for every seed and mode, in parallel. Row order is
/// scenario, seed, mode regardless of scheduling.
pub fn run_batch(scenarios: &[Scenario], cfg: &BatchConfig) -> MetricsTable {
    let jobs: Vec<(usize, u64)> = (0..scenarios.len())
        .flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, seed)| run_scenario(&scenarios[i], seed, &cfg.modes))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    MetricsTable { runs }
}

/// Reads seeds as a JSON array or as whitespace/comma separated integers.
pub fn read_seeds(path: &Path) -> Result<Vec<u64>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| HarnessError::Seeds(format!("not an integer: `{t}`"))))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub std: f64,
}

/// Mean and sample standard deviation; NaN mean when empty.
pub fn aggregate(values: &[f64]) -> Aggregate {
    let n = values.len();
    if n == 0 {
        return Aggregate { n, mean: f64::NAN, std: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Aggregate { n, mean, std }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Aggregates over the runs where each metric is defined.
    pub metrics: BTreeMap<String, Aggregate>,
}

impl ModeSummary {
    pub fn metric(&self, name: &str) -> Option<&Aggregate> {
        self.metrics.get(name)
    }
}

pub(super) fn summarize(table: &MetricsTable, mode: Mode) -> ModeSummary {
    let runs: Vec<&ScenarioRun> = table.mode(mode).collect();
    let successes = runs.iter().filter(|r| r.record.success).count();
    let mut metrics = BTreeMap::new();
    let mut add = |name: &str, f: &dyn Fn(&ScenarioRun) -> Option<f64>| {
        let v: Vec<f64> = runs.iter().filter_map(|r| f(r)).collect();
        metrics.insert(name.to_string(), aggregate(&v));
    };
    add("steps", &|r| Some(r.record.steps as f64));
    add("replan_count", &|r| Some(r.record.replan_count as f64));
    add("solved_nlps", &|r| Some(r.record.solved_nlps as f64));
    add("robot_path_length", &|r| Some(r.record.robot_path_length));
    add("path_ratio", &|r| r.record.path_ratio);
    add("task_iou", &|r| Some(r.record.task_iou));
    add("task_time_reduction", &|r| r.record.task_time_reduction);
    add("min_clearance", &|r| r.report.as_ref().map(|_| r.record.min_clearance));
    add("symbolic_plan_time", &|r| r.symbolic_time());
    add("total_solution_time", &|r| r.solution_time());
    add("task_time_reduction_with_pause", &|r| r.task_time_reduction_with_pause());
    ModeSummary {
        mode,
        runs: runs.len(),
        successes,
        success_rate: if runs.is_empty() { 0.0 } else { successes as f64 / runs.len() as f64 },
        metrics,
    }
}
