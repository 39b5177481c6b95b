use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mdp::{Demonstration, HighLevelAction, HighLevelState, Mdp, MdpSpec};
use super::PredictionError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrlConfig {
    pub discount: f64,
    /// Step size; decayed by 1/√k for plain gradient ascent.
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop when the feature-count gap ∞-norm drops below this.
    pub tol: f64,
    /// Soft value iteration stops when a sweep changes values by less than this.
    pub vi_tol: f64,
    pub vi_max_sweeps: usize,
    pub optimizer: Optimizer,
}

/// Weight update rule applied to the feature-count gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Optimizer {
    /// Plain ascent with step `lr/√k`.
    Gradient,
    /// Adam moments with constant step `lr`.
    Adam,
}

impl Default for IrlConfig {
    fn default() -> Self {
        IrlConfig {
            discount: 0.95,
            learning_rate: 0.1,
            max_iters: 20_000,
            tol: 1e-2,
            vi_tol: 1e-9,
            vi_max_sweeps: 10_000,
            optimizer: Optimizer::Adam,
        }
    }
}

/// Fitted reward weights and the induced maximum-entropy policy.
#[derive(Clone, Debug)]
pub struct IrlModel {
    pub mdp: Mdp,
    pub weights: Vec<f64>,
    pub discount: f64,
    /// `policy[s][a]` over `mdp.actions`; zero for illegal actions, empty row for terminal states.
    pub policy: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub gap: f64,
    pub converged: bool,
}

/// Serialized form of an [`IrlModel`]; the policy is recomputed on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrlModelFile {
    pub mdp: MdpSpec,
    pub weights: Vec<f64>,
    pub discount: f64,
    pub iterations: usize,
    pub gap: f64,
    pub converged: bool,
}

pub(crate) fn reward(mdp: &Mdp, weights: &[f64]) -> Vec<f64> {
    mdp.state_features
        .iter()
        .map(|f| f.iter().map(|&i| weights[i]).sum())
        .collect()
}

fn log_sum_exp(vals: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = vals.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + vals.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Soft Bellman sweeps from `values`; returns the ∞-norm change of each sweep.
///
/// Terminal states are absorbing with `V = r`; a non-terminal state without
/// legal actions is a dead end with a large negative value.
pub fn soft_value_iteration(
    mdp: &Mdp,
    reward: &[f64],
    discount: f64,
    values: &mut Vec<f64>,
    tol: f64,
    max_sweeps: usize,
) -> Vec<f64> {
    const DEAD_END: f64 = -1e3;
    let n = mdp.states.len();
    if values.len() != n {
        *values = reward.to_vec();
    }
    let mut deltas = Vec::new();
    let mut next = vec![0.0; n];
    for _ in 0..max_sweeps {
        let mut delta = 0.0f64;
        for s in 0..n {
            let v = if mdp.terminal[s] {
                reward[s]
            } else {
                let succ = mdp.next[s].iter().flatten().map(|&j| discount * values[j]);
                let soft = log_sum_exp(succ);
                if soft.is_finite() {
                    reward[s] + soft
                } else {
                    reward[s] + DEAD_END
                }
            };
            delta = delta.max((v - values[s]).abs());
            next[s] = v;
        }
        std::mem::swap(values, &mut next);
        deltas.push(delta);
        if delta < tol {
            break;
        }
    }
    deltas
}

pub(crate) fn policy_from_values(mdp: &Mdp, values: &[f64], discount: f64) -> Vec<Vec<f64>> {
    (0..mdp.states.len())
        .map(|s| {
            if mdp.terminal[s] {
                return Vec::new();
            }
            let q: Vec<Option<f64>> = mdp.next[s].iter().map(|n| n.map(|j| discount * values[j])).collect();
            let lse = log_sum_exp(q.iter().flatten().copied());
            q.iter()
                .map(|v| v.map_or(0.0, |v| (v - lse).exp()))
                .collect()
        })
        .collect()
}

/// Discounted feature counts of one demonstration.
fn demo_features(mdp: &Mdp, demo: &Demonstration, discount: f64, out: &mut [f64]) {
    let mut g = 1.0;
    for &s in &demo.states {
        for i in mdp.features(&mdp.states[s]) {
            out[i] += g;
        }
        g *= discount;
    }
}

/// Expected discounted feature counts under `policy` from the start distribution `d0`.
pub fn expected_features(mdp: &Mdp, policy: &[Vec<f64>], discount: f64, d0: &[f64]) -> Vec<f64> {
    let n = mdp.states.len();
    let mut mu = vec![0.0; mdp.feature_dim()];
    let mut d = d0.to_vec();
    let mut g = 1.0;
    let feats = &mdp.state_features;
    for _ in 0..100_000 {
        let mass: f64 = d.iter().sum();
        if mass * g < 1e-9 {
            break;
        }
        let mut nd = vec![0.0; n];
        for s in 0..n {
            if d[s] == 0.0 {
                continue;
            }
            for &i in &feats[s] {
                mu[i] += g * d[s];
            }
            if mdp.terminal[s] {
                continue;
            }
            for (a, nx) in mdp.next[s].iter().enumerate() {
                if let Some(j) = nx {
                    nd[*j] += d[s] * policy[s][a];
                }
            }
        }
        d = nd;
        g *= discount;
    }
    mu
}

fn gap_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Fits MaxEnt reward weights by gradient ascent on the demonstration likelihood.
pub fn irl_fit(demos: &[Demonstration], mdp: &Mdp, cfg: &IrlConfig) -> Result<IrlModel, PredictionError> {
    if demos.is_empty() {
        return Err(PredictionError::NoDemonstrations);
    }
    for (k, d) in demos.iter().enumerate() {
        let last = *d.states.last().expect("nonempty demonstration");
        if !mdp.terminal[last] {
            return Err(PredictionError::DemoIncomplete(k));
        }
    }
    let dim = mdp.feature_dim();
    let m = demos.len() as f64;
    let mut empirical = vec![0.0; dim];
    for d in demos {
        demo_features(mdp, d, cfg.discount, &mut empirical);
    }
    empirical.iter_mut().for_each(|v| *v /= m);
    let mut d0 = vec![0.0; mdp.states.len()];
    for d in demos {
        d0[d.states[0]] += 1.0 / m;
    }

    let mut weights = vec![0.0; dim];
    let (mut m1, mut m2) = (vec![0.0; dim], vec![0.0; dim]);
    let mut values = Vec::new();
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut policy = Vec::new();
    for k in 1..=cfg.max_iters {
        let r = reward(mdp, &weights);
        soft_value_iteration(mdp, &r, cfg.discount, &mut values, cfg.vi_tol, cfg.vi_max_sweeps);
        policy = policy_from_values(mdp, &values, cfg.discount);
        let expected = expected_features(mdp, &policy, cfg.discount, &d0);
        gap = gap_norm(&empirical, &expected);
        iterations = k;
        if gap < cfg.tol {
            break;
        }
        match cfg.optimizer {
            Optimizer::Gradient => {
                let lr = cfg.learning_rate / (k as f64).sqrt();
                for ((w, e), x) in weights.iter_mut().zip(&empirical).zip(&expected) {
                    *w += lr * (e - x);
                }
            }
            Optimizer::Adam => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                let (c1, c2) = (1.0 - B1.powi(k as i32), 1.0 - B2.powi(k as i32));
                for i in 0..dim {
                    let g = empirical[i] - expected[i];
                    m1[i] = B1 * m1[i] + (1.0 - B1) * g;
                    m2[i] = B2 * m2[i] + (1.0 - B2) * g * g;
                    weights[i] += cfg.learning_rate * (m1[i] / c1) / ((m2[i] / c2).sqrt() + 1e-8);
                }
            }
        }
    }
    let converged = gap < cfg.tol;
    if !converged {
        log::warn!("IRL stopped after {iterations} iterations with feature gap {gap:.3e}");
    }
    Ok(IrlModel {
        mdp: mdp.clone(),
        weights,
        discount: cfg.discount,
        policy,
        values,
        iterations,
        gap,
        converged,
    })
}

impl IrlModel {
    /// Rebuilds the policy for fixed weights.
    pub fn from_weights(mdp: Mdp, weights: Vec<f64>, discount: f64) -> Result<Self, PredictionError> {
        if weights.len() != mdp.feature_dim() {
            return Err(PredictionError::InvalidModel(format!(
                "expected {} weights, got {}",
                mdp.feature_dim(),
                weights.len()
            )));
        }
        let r = reward(&mdp, &weights);
        let mut values = Vec::new();
        let cfg = IrlConfig::default();
        soft_value_iteration(&mdp, &r, discount, &mut values, cfg.vi_tol, cfg.vi_max_sweeps);
        let policy = policy_from_values(&mdp, &values, discount);
        Ok(IrlModel {
            mdp,
            weights,
            discount,
            policy,
            values,
            iterations: 0,
            gap: f64::NAN,
            converged: true,
        })
    }

    pub fn to_file(&self) -> IrlModelFile {
        IrlModelFile {
            mdp: self.mdp.spec.clone(),
            weights: self.weights.clone(),
            discount: self.discount,
            iterations: self.iterations,
            gap: self.gap,
            converged: self.converged,
        }
    }

    pub fn from_file(file: IrlModelFile) -> Result<Self, PredictionError> {
        let mdp = Mdp::new(file.mdp)?;
        let mut model = Self::from_weights(mdp, file.weights, file.discount)?;
        model.iterations = file.iterations;
        model.gap = file.gap;
        model.converged = file.converged;
        Ok(model)
    }

    /// Action distribution in `s` as `(action, probability)` pairs with positive mass.
    pub fn action_distribution(&self, s: &HighLevelState) -> Result<Vec<(HighLevelAction, f64)>, PredictionError> {
        let i = self
            .mdp
            .state_index(s)
            .ok_or_else(|| PredictionError::InvalidState(s.to_string()))?;
        Ok(self.policy[i]
            .iter()
            .zip(&self.mdp.actions)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, a)| (*a, *p))
            .collect())
    }
}

/// Default cap on rollout length.
pub const ROLLOUT_CAP: usize = 200;

fn rollout_with(
    model: &IrlModel,
    s0: &HighLevelState,
    goal: &dyn Fn(&HighLevelState) -> bool,
    cap: usize,
    mut choose: impl FnMut(&[(HighLevelAction, f64)]) -> HighLevelAction,
) -> Result<Vec<HighLevelAction>, PredictionError> {
    let mdp = &model.mdp;
    mdp.check_consistent(s0)?;
    let mut s = s0.clone();
    let mut out = Vec::new();
    while !goal(&s) {
        if out.len() >= cap {
            return Err(PredictionError::StepCapExceeded(cap));
        }
        let dist = model.action_distribution(&s)?;
        if dist.is_empty() {
            return Err(PredictionError::StepCapExceeded(out.len()));
        }
        let a = choose(&dist);
        s = mdp.step(&s, a).expect("policy only selects legal actions");
        out.push(a);
    }
    Ok(out)
}

/// Samples actions from the policy until `goal` holds.
pub fn rollout_policy(
    model: &IrlModel,
    s0: &HighLevelState,
    goal: &dyn Fn(&HighLevelState) -> bool,
    seed: u64,
    cap: usize,
) -> Result<Vec<HighLevelAction>, PredictionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rollout_with(model, s0, goal, cap, |dist| {
        let w = WeightedIndex::new(dist.iter().map(|(_, p)| *p)).expect("positive weights");
        dist[w.sample(&mut rng)].0
    })
}

/// Follows the most probable action until `goal` holds (ties broken by action order).
pub fn most_probable_rollout(
    model: &IrlModel,
    s0: &HighLevelState,
    goal: &dyn Fn(&HighLevelState) -> bool,
    cap: usize,
) -> Result<Vec<HighLevelAction>, PredictionError> {
    rollout_with(model, s0, goal, cap, |dist| {
        dist.iter()
            .fold(None::<(HighLevelAction, f64)>, |best, &(a, p)| match best {
                Some((_, q)) if q >= p => best,
                _ => Some((a, p)),
            })
            .expect("nonempty distribution")
            .0
    })
}

/// Scripted expert: repeatedly fetches an object for an unmet goal term.
///
/// Uses the first goal alternative. Choices among unmet terms and source
/// locations are drawn from `rng`.
pub fn scripted_demo<R: Rng>(mdp: &Mdp, start: &HighLevelState, rng: &mut R) -> Result<Demonstration, PredictionError> {
    let terms = mdp.goal_terms(0);
    let mut s = start.clone();
    let mut actions = Vec::new();
    let push = |s: &mut HighLevelState, a: HighLevelAction, actions: &mut Vec<HighLevelAction>| {
        if let Some(n) = mdp.step(s, a) {
            *s = n;
            actions.push(a);
        }
    };
    for _ in 0..1000 {
        if mdp.is_goal(&s) {
            return Demonstration::replay(mdp, start, &actions);
        }
        if s.carry != 0 {
            let c = s.carry - 1;
            let target = terms
                .iter()
                .find(|&&(slot, min)| mdp.slots[slot].0 == c && (s.counts[slot] as usize) < min)
                .map(|&(slot, _)| mdp.slots[slot].1)
                .or_else(|| mdp.classes[c].locations.first().copied())
                .ok_or(PredictionError::DemoIncomplete(0))?;
            push(&mut s, HighLevelAction::GoTo(target), &mut actions);
            push(&mut s, HighLevelAction::Place, &mut actions);
            continue;
        }
        let unmet: Vec<(usize, usize)> = terms
            .iter()
            .filter(|&&(slot, min)| (s.counts[slot] as usize) < min)
            .copied()
            .collect();
        let &(slot, _) = unmet.choose(rng).ok_or(PredictionError::DemoIncomplete(0))?;
        let (c, target) = mdp.slots[slot];
        let sources: Vec<usize> = mdp.classes[c]
            .locations
            .iter()
            .copied()
            .filter(|&l| l != target && mdp.slot_of(c, l).is_some_and(|k| s.counts[k] > 0))
            .collect();
        let &src = sources.choose(rng).ok_or(PredictionError::DemoIncomplete(0))?;
        push(&mut s, HighLevelAction::GoTo(src), &mut actions);
        push(&mut s, HighLevelAction::PickUp(c), &mut actions);
        push(&mut s, HighLevelAction::GoTo(target), &mut actions);
        push(&mut s, HighLevelAction::Place, &mut actions);
    }
    Err(PredictionError::DemoIncomplete(0))
}
