use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use super::eval::{anchor_point, evaluate_flat, from_flat, to_flat, Evaluation};
use super::problem::{ConstraintKind, NlpProblem};
use super::TrajoptError;
use crate::kinematics::Pose2;
use crate::Real;

/// Interior-point / penalty schedule and Gauss-Newton settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    /// Initial barrier weight.
    pub mu0: T,
    /// Barrier decrease per stage, in (0, 1).
    pub mu_factor: T,
    /// Initial equality penalty weight.
    pub rho0: T,
    /// Penalty increase per stage.
    pub rho_factor: T,
    /// Number of outer stages.
    pub stages: usize,
    /// Gauss-Newton iterations per stage.
    pub max_inner: usize,
    /// Step-norm tolerance (∞-norm, meters/radians).
    pub tol: T,
    /// Max equality residual accepted as converged.
    pub eq_tol: T,
    /// Backtracking factor of the line search.
    pub backtrack: T,
    /// Armijo sufficient-decrease constant.
    pub armijo: T,
    pub max_backtracks: usize,
    /// Levenberg damping added to the Gauss-Newton matrix.
    pub damping: T,
    /// Seed for the direction of the infeasible-start repair.
    pub repair_seed: u64,
    /// Distance by which repaired waypoints clear their constraint.
    pub repair_push: T,
    pub record_trace: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            mu0: T::one(),
            mu_factor: T::lit(0.2),
            rho0: T::lit(1e3),
            rho_factor: T::lit(10.0),
            stages: 4,
            max_inner: 100,
            tol: T::lit(1e-6),
            eq_tol: T::lit(1e-3),
            backtrack: T::lit(0.5),
            armijo: T::lit(1e-4),
            max_backtracks: 40,
            damping: T::lit(1e-9),
            repair_seed: 0,
            repair_push: T::lit(2e-3),
            record_trace: false,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn final_mu(&self) -> T {
        self.mu0 * self.mu_factor.powi(self.stages.saturating_sub(1) as i32)
    }

    pub fn final_rho(&self) -> T {
        self.rho0 * self.rho_factor.powi(self.stages.saturating_sub(1) as i32)
    }
}

/// One accepted (or terminal) Gauss-Newton iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub stage: usize,
    pub iteration: usize,
    pub mu: f64,
    pub rho: f64,
    pub merit: f64,
    pub objective: f64,
    pub max_eq: f64,
    pub max_ineq: f64,
    pub step_norm: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySolution<T> {
    pub waypoints: Vec<Pose2<T>>,
    pub converged: bool,
    pub objective: T,
    /// Recomputed from `waypoints`.
    pub max_eq: T,
    /// Recomputed from `waypoints`; zero when every inequality holds.
    pub max_ineq: T,
    pub iterations: usize,
    /// The start was infeasible and had to be projected.
    pub repaired: bool,
    pub trace: Vec<TraceRow>,
}

impl<T: Real> TrajectorySolution<T> {
    pub fn path_length(&self, start: Pose2<T>) -> T {
        let mut prev = start.xy();
        let mut total = T::zero();
        for w in &self.waypoints {
            total += crate::kinematics::dist2(prev, w.xy());
            prev = w.xy();
        }
        total
    }
}

/// Writes a trace as CSV with a header row.
pub fn write_trace_csv(trace: &[TraceRow], path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in trace {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn merit<T: Real>(e: &Evaluation<T>, mu: T, rho: T) -> T {
    let mut m = e.objective + rho * e.eq.iter().map(|h| *h * *h).sum::<T>();
    for g in &e.ineq {
        if *g >= T::zero() {
            return T::infinity();
        }
        m -= mu * (-*g).ln();
    }
    m
}

/// Projects violated inequalities of each waypoint back inside.
fn repair<T: Real>(p: &NlpProblem<T>, z: &mut [T], cfg: &SolverConfig<T>) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.repair_seed);
    let push = cfg.repair_push;
    let mut side: Option<T> = None;
    let mut changed = false;
    let mut start = 0;
    while start < p.constraints.len() {
        let step = p.constraints[start].step;
        let end = p.constraints[start..]
            .iter()
            .position(|c| c.step != step)
            .map_or(p.constraints.len(), |k| start + k);
        let group = &p.constraints[start..end];
        for _ in 0..50 {
            let mut moved = false;
            for con in group {
                let (pt, _) = anchor_point(p, z, step, con.anchor);
                let target = match con.kind {
                    ConstraintKind::Clearance { center, radius } => {
                        let v = [pt[0] - center[0], pt[1] - center[1]];
                        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
                        if n > radius {
                            continue;
                        }
                        // Keep the progress along the path and step aside.
                        let d = path_direction(p, z, step);
                        let along = (v[0] * d[0] + v[1] * d[1]).max(-radius).min(radius);
                        let perp = [v[0] - along * d[0], v[1] - along * d[1]];
                        let pn = (perp[0] * perp[0] + perp[1] * perp[1]).sqrt();
                        let normal = if pn > T::lit(1e-9) {
                            [perp[0] / pn, perp[1] / pn]
                        } else {
                            let s = *side.get_or_insert_with(|| if rng.gen_bool(0.5) { T::one() } else { -T::one() });
                            [-d[1] * s, d[0] * s]
                        };
                        let r = radius + push;
                        let off = (r * r - along * along).max(T::zero()).sqrt();
                        [
                            center[0] + along * d[0] + off * normal[0],
                            center[1] + along * d[1] + off * normal[1],
                        ]
                    }
                    ConstraintKind::Within { center, radius } => {
                        let v = [pt[0] - center[0], pt[1] - center[1]];
                        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
                        if n < radius {
                            continue;
                        }
                        let r = (radius - push).max(T::zero());
                        [center[0] + r * v[0] / n, center[1] + r * v[1] / n]
                    }
                    ConstraintKind::Inside { lo, hi } => {
                        let inside = (0..2).all(|k| pt[k] > lo[k] && pt[k] < hi[k]);
                        if inside {
                            continue;
                        }
                        std::array::from_fn(|k| {
                            let mid = (lo[k] + hi[k]) / T::lit(2.0);
                            let a = (lo[k] + push).min(mid);
                            let b = (hi[k] - push).max(mid);
                            pt[k].max(a).min(b)
                        })
                    }
                    ConstraintKind::Reach { .. } => continue,
                };
                z[3 * step] += target[0] - pt[0];
                z[3 * step + 1] += target[1] - pt[1];
                moved = true;
            }
            if !moved {
                break;
            }
            changed = true;
        }
        start = end;
    }
    changed
}

/// Unit direction of travel through waypoint `i`, from its neighbours.
fn path_direction<T: Real>(p: &NlpProblem<T>, z: &[T], i: usize) -> [T; 2] {
    let before = if i == 0 {
        p.start.xy()
    } else {
        [z[3 * (i - 1)], z[3 * (i - 1) + 1]]
    };
    let after = if i + 1 < p.steps {
        [z[3 * (i + 1)], z[3 * (i + 1) + 1]]
    } else {
        [z[3 * i], z[3 * i + 1]]
    };
    let d = [after[0] - before[0], after[1] - before[1]];
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if n > T::lit(1e-9) {
        [d[0] / n, d[1] / n]
    } else {
        [T::one(), T::zero()]
    }
}

/// Solves `p` by Gauss-Newton on the penalty/barrier merit.
///
/// Without a warm start the stages run from `mu0`/`rho0`, starting at the
/// keyframe interpolation. A warm start runs only the final stage.
pub fn solve<T: Real>(
    p: &NlpProblem<T>,
    cfg: &SolverConfig<T>,
    warm_start: Option<&[Pose2<T>]>,
) -> Result<TrajectorySolution<T>, TrajoptError> {
    let mut z = match warm_start {
        Some(w) if w.len() != p.steps => {
            return Err(TrajoptError::DimensionMismatch {
                expected: p.steps,
                got: w.len(),
            })
        }
        Some(w) => to_flat(w),
        None => to_flat(&p.interpolation()),
    };
    let repaired = repair(p, &mut z, cfg);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let first_stage = if warm_start.is_some() {
        cfg.stages.saturating_sub(1)
    } else {
        0
    };

    let mut e = evaluate_flat(p, &z);
    if e.ineq.iter().any(|g| *g >= T::zero()) {
        return Ok(finish(p, from_flat(&z), false, cfg.eq_tol, iterations, repaired, trace));
    }
    let n = z.len();
    let two = T::lit(2.0);
    let mut last_step = T::infinity();

    for stage in first_stage..cfg.stages {
        let mu = cfg.mu0 * cfg.mu_factor.powi(stage as i32);
        let rho = cfg.rho0 * cfg.rho_factor.powi(stage as i32);
        let mut m = merit(&e, mu, rho);
        last_step = T::infinity();
        for it in 0..cfg.max_inner {
            let mut grad = e.gradient.clone();
            let mut h = BandMatrix::zeros(n, 8);
            accumulate(&mut h, &e.cost_jacobian, two);
            for (r, row) in e.eq.iter().zip(&e.eq_jacobian) {
                for &(j, v) in row {
                    grad[j] += two * rho * *r * v;
                }
            }
            accumulate(&mut h, &e.eq_jacobian, two * rho);
            for (g, row) in e.ineq.iter().zip(&e.ineq_jacobian) {
                let s = -*g;
                for &(j, v) in row {
                    grad[j] += mu * v / s;
                }
                accumulate_row(&mut h, row, mu / (s * s));
            }
            let mut lambda = cfg.damping;
            let chol = loop {
                let mut hh = h.clone();
                hh.add_diagonal(lambda);
                if let Some(c) = hh.cholesky() {
                    break Some(c);
                }
                lambda = (lambda * T::lit(10.0)).max(T::lit(1e-8));
                if lambda > T::lit(1e8) {
                    break None;
                }
            };
            let Some(chol) = chol else { break };
            let neg: Vec<T> = grad.iter().map(|g| -*g).collect();
            let delta = chol.solve(&neg);
            iterations += 1;
            let step_norm = delta.iter().fold(T::zero(), |a, d| a.max(d.abs()));
            last_step = step_norm;
            if step_norm < cfg.tol {
                if cfg.record_trace {
                    trace.push(row_of(stage, it, mu, rho, m, &e, step_norm, 0.0));
                }
                break;
            }
            let slope: T = grad.iter().zip(&delta).map(|(g, d)| *g * *d).sum();
            let mut alpha = T::one();
            let mut accepted = None;
            for _ in 0..cfg.max_backtracks {
                let trial: Vec<T> = z.iter().zip(&delta).map(|(a, d)| *a + alpha * *d).collect();
                let te = evaluate_flat(p, &trial);
                let tm = merit(&te, mu, rho);
                let slack = T::lit(1e-14) * m.abs();
                if tm.is_finite() && tm <= m + cfg.armijo * alpha * slope + slack {
                    accepted = Some((trial, te, tm));
                    break;
                }
                alpha *= cfg.backtrack;
            }
            let Some((trial, te, tm)) = accepted else { break };
            z = trial;
            e = te;
            m = tm;
            if cfg.record_trace {
                trace.push(row_of(stage, it, mu, rho, m, &e, step_norm, alpha.as_f64()));
            }
        }
    }
    let ok = last_step < cfg.tol;
    Ok(finish(p, from_flat(&z), ok, cfg.eq_tol, iterations, repaired, trace))
}

fn accumulate<T: Real>(h: &mut BandMatrix<T>, rows: &[Vec<(usize, T)>], w: T) {
    for row in rows {
        accumulate_row(h, row, w);
    }
}

fn accumulate_row<T: Real>(h: &mut BandMatrix<T>, row: &[(usize, T)], w: T) {
    for &(i, a) in row {
        for &(j, b) in row {
            if j <= i {
                h.add(i, j, w * a * b);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn row_of<T: Real>(stage: usize, it: usize, mu: T, rho: T, m: T, e: &Evaluation<T>, step: T, alpha: f64) -> TraceRow {
    TraceRow {
        stage,
        iteration: it,
        mu: mu.as_f64(),
        rho: rho.as_f64(),
        merit: m.as_f64(),
        objective: e.objective.as_f64(),
        max_eq: e.max_eq().as_f64(),
        max_ineq: e.max_ineq_violation().as_f64(),
        step_norm: step.as_f64(),
        alpha,
    }
}

fn finish<T: Real>(
    p: &NlpProblem<T>,
    waypoints: Vec<Pose2<T>>,
    step_ok: bool,
    eq_tol: T,
    iterations: usize,
    repaired: bool,
    trace: Vec<TraceRow>,
) -> TrajectorySolution<T> {
    let e = evaluate_flat(p, &to_flat(&waypoints));
    let max_eq = e.max_eq();
    let max_ineq = e.max_ineq_violation();
    TrajectorySolution {
        converged: step_ok && max_eq < eq_tol && max_ineq <= T::zero(),
        objective: e.objective,
        max_eq,
        max_ineq,
        iterations,
        repaired,
        trace,
        waypoints,
    }
}
