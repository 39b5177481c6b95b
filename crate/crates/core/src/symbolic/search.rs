//! Tie-shortest skeleton enumeration.
//!
//! Unit-cost Dijkstra guided by the missing-goal-count heuristic (A*). The
//! heuristic is consistent for domains where one action adds at most one goal
//! proposition, so every node is closed at its optimal depth and all optimal
//! predecessors are recorded. Tie skeletons are then read off the
//! shortest-path DAG in lexicographic action order.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::state::SymbolicState;
use crate::pddl::{Atom, GroundedAction};

/// Per-action phase durations in 10 Hz steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDurations {
    pub by_action: HashMap<String, usize>,
    pub default: usize,
}

impl Default for PhaseDurations {
    fn default() -> Self {
        let by_action = [("move", 30), ("pick", 5), ("place", 5)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        PhaseDurations {
            by_action,
            default: 30,
        }
    }
}

impl PhaseDurations {
    pub fn of(&self, action: &str) -> usize {
        self.by_action.get(action).copied().unwrap_or(self.default)
    }
}

/// Grounded action sequence with per-phase durations.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    pub actions: Vec<GroundedAction>,
    pub phase_durations: Vec<usize>,
    /// Ranking cost from the interpolation grounding; 0 until ranked.
    pub cost: f64,
    /// Planner step at which the skeleton was adopted.
    pub origin_time: usize,
}

impl Skeleton {
    pub fn new(actions: Vec<GroundedAction>, durations: &PhaseDurations) -> Self {
        let phase_durations = actions.iter().map(|a| durations.of(&a.name)).collect();
        Skeleton {
            actions,
            phase_durations,
            cost: 0.0,
            origin_time: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn total_duration(&self) -> usize {
        self.phase_durations.iter().sum()
    }

    /// `move(table) pick(cup,table) ...`
    pub fn describe(&self) -> String {
        self.actions
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The skeleton from action `from` onwards.
    pub fn suffix(&self, from: usize) -> Skeleton {
        Skeleton {
            actions: self.actions[from..].to_vec(),
            phase_durations: self.phase_durations[from..].to_vec(),
            cost: self.cost,
            origin_time: self.origin_time,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Maximum skeleton length; `None` means 4 per goal proposition plus 2.
    pub depth_bound: Option<usize>,
    /// Cap on the number of returned ties (lexicographically first ones).
    pub max_ties: usize,
    /// Use the heuristic to order expansion. Disabling gives plain BFS.
    pub use_heuristic: bool,
    pub durations: PhaseDurations,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            depth_bound: None,
            max_ties: 20_000,
            use_heuristic: true,
            durations: PhaseDurations::default(),
        }
    }
}

impl SearchConfig {
    pub fn bound_for(&self, goal: &BTreeSet<Atom>) -> usize {
        self.depth_bound.unwrap_or(4 * goal.len() + 2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    /// The start state already satisfies the goal.
    AlreadySatisfied,
    /// All minimal-length skeletons, lexicographically ordered.
    Found(Vec<Skeleton>),
}

impl SearchOutcome {
    pub fn skeletons(&self) -> &[Skeleton] {
        match self {
            SearchOutcome::AlreadySatisfied => &[],
            SearchOutcome::Found(s) => s,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("no grounded actions supplied")]
    NoActions,
    #[error("goal not reached within depth bound {0}")]
    DepthBoundExceeded(usize),
    #[error("goal unreachable: state space exhausted")]
    Unreachable,
}

/// Packed proposition set over a fixed atom index.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Box<[u64]>);

impl Bits {
    fn zeros(words: usize) -> Self {
        Bits(vec![0; words].into_boxed_slice())
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    fn disjoint(&self, other: &Bits) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & b == 0)
    }

    fn apply(&self, del: &Bits, add: &Bits) -> Bits {
        Bits(
            self.0
                .iter()
                .zip(del.0.iter())
                .zip(add.0.iter())
                .map(|((s, d), a)| (s & !d) | a)
                .collect(),
        )
    }

    fn missing(&self, goal: &Bits) -> usize {
        goal.0
            .iter()
            .zip(self.0.iter())
            .map(|(g, s)| (g & !s).count_ones() as usize)
            .sum()
    }
}

struct Compiled {
    pre_pos: Bits,
    pre_neg: Bits,
    add: Bits,
    del: Bits,
}

struct Node {
    state: Bits,
    g: usize,
    /// Optimal predecessors: (node, compiled action index).
    parents: Vec<(usize, usize)>,
}

/// Returns every minimal-length skeleton from `s0` whose final state contains `goal`.
pub fn search_skeletons(
    s0: &SymbolicState,
    goal: &BTreeSet<Atom>,
    actions: &[GroundedAction],
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    if s0.satisfies(goal) {
        return Ok(SearchOutcome::AlreadySatisfied);
    }
    if actions.is_empty() {
        return Err(SearchError::NoActions);
    }
    let bound = cfg.bound_for(goal);

    let mut index: HashMap<&Atom, usize> = HashMap::new();
    for a in s0.iter().chain(goal.iter()).chain(actions.iter().flat_map(|a| {
        a.pre_pos
            .iter()
            .chain(a.pre_neg.iter())
            .chain(a.add.iter())
            .chain(a.del.iter())
    })) {
        let n = index.len();
        index.entry(a).or_insert(n);
    }
    let words = index.len().div_ceil(64).max(1);
    let pack = |atoms: &mut dyn Iterator<Item = &Atom>| {
        let mut b = Bits::zeros(words);
        for a in atoms {
            b.set(index[a]);
        }
        b
    };

    // Actions sorted by name/args so that DAG traversal is lexicographic.
    let mut order: Vec<usize> = (0..actions.len()).collect();
    order.sort_by(|&i, &j| actions[i].key().cmp(&actions[j].key()));
    let compiled: Vec<Compiled> = order
        .iter()
        .map(|&i| {
            let a = &actions[i];
            Compiled {
                pre_pos: pack(&mut a.pre_pos.iter()),
                pre_neg: pack(&mut a.pre_neg.iter()),
                add: pack(&mut a.add.iter()),
                del: pack(&mut a.del.iter()),
            }
        })
        .collect();
    let goal_bits = pack(&mut goal.iter());
    let h = |s: &Bits| if cfg.use_heuristic { s.missing(&goal_bits) } else { 0 };

    let start = pack(&mut s0.iter());
    let mut nodes = vec![Node {
        state: start.clone(),
        g: 0,
        parents: Vec::new(),
    }];
    let mut lookup: HashMap<Bits, usize> = HashMap::from([(start, 0)]);
    let mut closed = vec![false];
    // Min-heap on (f, g, insertion); lower g first among equal f keeps parents ahead of children.
    let mut open = BinaryHeap::new();
    open.push(Reverse((h(&nodes[0].state), 0usize, 0usize)));
    let mut best: Option<usize> = None;
    let mut goals = Vec::new();
    let mut bound_hit = false;

    while let Some(Reverse((f, g, id))) = open.pop() {
        if closed[id] || g != nodes[id].g {
            continue;
        }
        if best.is_some_and(|c| f > c) {
            break;
        }
        closed[id] = true;
        if goal_bits.subset_of(&nodes[id].state) {
            best.get_or_insert(g);
            goals.push(id);
            continue;
        }
        if g >= bound {
            bound_hit = true;
            continue;
        }
        for (ai, ca) in compiled.iter().enumerate() {
            let s = &nodes[id].state;
            if !(ca.pre_pos.subset_of(s) && ca.pre_neg.disjoint(s)) {
                continue;
            }
            let child = s.apply(&ca.del, &ca.add);
            let cg = g + 1;
            match lookup.get(&child) {
                Some(&cid) => {
                    let node = &mut nodes[cid];
                    if cg < node.g {
                        // Only reachable with an inconsistent heuristic: reopen.
                        closed[cid] = false;
                        node.g = cg;
                        node.parents = vec![(id, ai)];
                        let hf = h(&node.state);
                        open.push(Reverse((cg + hf, cg, cid)));
                    } else if cg == node.g {
                        node.parents.push((id, ai));
                    }
                }
                None => {
                    let cid = nodes.len();
                    let hf = h(&child);
                    lookup.insert(child.clone(), cid);
                    nodes.push(Node {
                        state: child,
                        g: cg,
                        parents: vec![(id, ai)],
                    });
                    closed.push(false);
                    open.push(Reverse((cg + hf, cg, cid)));
                }
            }
        }
    }

    if goals.is_empty() {
        return Err(if bound_hit {
            SearchError::DepthBoundExceeded(bound)
        } else {
            SearchError::Unreachable
        });
    }

    // Forward edges restricted to nodes that reach a goal on an optimal path.
    let mut on_path = vec![false; nodes.len()];
    let mut stack = goals.clone();
    for &g in &goals {
        on_path[g] = true;
    }
    let mut children: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    while let Some(n) = stack.pop() {
        for &(p, ai) in &nodes[n].parents {
            children.entry(p).or_default().push((ai, n));
            if !on_path[p] {
                on_path[p] = true;
                stack.push(p);
            }
        }
    }
    for list in children.values_mut() {
        list.sort_unstable();
        list.dedup();
    }

    let is_goal: Vec<bool> = {
        let mut v = vec![false; nodes.len()];
        for &g in &goals {
            v[g] = true;
        }
        v
    };
    let mut out = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    enumerate(0, &children, &is_goal, &mut path, &mut out, cfg.max_ties);

    let skeletons = out
        .into_iter()
        .map(|p| {
            let acts = p.into_iter().map(|ai| actions[order[ai]].clone()).collect();
            Skeleton::new(acts, &cfg.durations)
        })
        .collect();
    Ok(SearchOutcome::Found(skeletons))
}

fn enumerate(
    node: usize,
    children: &HashMap<usize, Vec<(usize, usize)>>,
    is_goal: &[bool],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    if is_goal[node] {
        out.push(path.clone());
        return;
    }
    if let Some(edges) = children.get(&node) {
        for &(ai, child) in edges {
            path.push(ai);
            enumerate(child, children, is_goal, path, out, cap);
            path.pop();
        }
    }
}
