use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PredictionError;

/// Upper bound on the number of enumerated high-level states.
pub const MAX_STATES: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    /// Locations where objects of this class may rest.
    pub locations: Vec<String>,
    /// Workspace objects belonging to the class.
    pub objects: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartSpec {
    pub human: String,
    /// Class carried at the start, if any.
    #[serde(default)]
    pub carry: Option<String>,
    /// Per class, per location object counts. Missing entries are zero.
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalTerm {
    pub class: String,
    pub location: String,
    pub min: usize,
}

/// JSON description of the high-level task MDP.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdpSpec {
    pub locations: Vec<String>,
    pub classes: Vec<ClassSpec>,
    pub start: StartSpec,
    /// Alternatives of conjunctive count goals; any satisfied alternative is terminal.
    pub goal: Vec<Vec<GoalTerm>>,
}

/// Counts per (class, allowed location), human location and carried class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HighLevelState {
    pub counts: Vec<u8>,
    pub human: usize,
    /// 0 when empty-handed, `c + 1` when carrying an object of class `c`.
    pub carry: usize,
}

impl fmt::Display for HighLevelState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for c in &self.counts {
            write!(f, "{c}, ")?;
        }
        write!(f, "{}, {})", self.human, self.carry)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HighLevelAction {
    GoTo(usize),
    PickUp(usize),
    Place,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectClass {
    pub name: String,
    pub locations: Vec<usize>,
    pub objects: Vec<String>,
}

/// Enumerated deterministic high-level MDP.
#[derive(Clone, Debug)]
pub struct Mdp {
    pub spec: MdpSpec,
    pub locations: Vec<String>,
    pub classes: Vec<ObjectClass>,
    /// `(class, location)` of each count component.
    pub slots: Vec<(usize, usize)>,
    pub start: HighLevelState,
    goal: Vec<Vec<(usize, usize)>>,
    pub states: Vec<HighLevelState>,
    index: HashMap<HighLevelState, usize>,
    pub actions: Vec<HighLevelAction>,
    /// `next[s][a]`: successor index of action `a` in state `s`, if legal.
    pub next: Vec<Vec<Option<usize>>>,
    pub terminal: Vec<bool>,
    /// Active feature indices per state.
    pub state_features: Vec<Vec<usize>>,
}

fn find(list: &[String], name: &str, what: &str) -> Result<usize, PredictionError> {
    list.iter()
        .position(|l| l == name)
        .ok_or_else(|| PredictionError::UnknownName(format!("{what} `{name}`")))
}

impl Mdp {
    pub fn new(spec: MdpSpec) -> Result<Self, PredictionError> {
        let locations = spec.locations.clone();
        let mut classes = Vec::new();
        for c in &spec.classes {
            let locs = c
                .locations
                .iter()
                .map(|l| find(&locations, l, "location"))
                .collect::<Result<Vec<_>, _>>()?;
            classes.push(ObjectClass {
                name: c.name.clone(),
                locations: locs,
                objects: c.objects.clone(),
            });
        }
        let class_names: Vec<String> = classes.iter().map(|c| c.name.clone()).collect();
        let slots: Vec<(usize, usize)> = classes
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.locations.iter().map(move |&l| (ci, l)))
            .collect();

        let mut goal = Vec::new();
        for alt in &spec.goal {
            let mut terms = Vec::new();
            for g in alt {
                let c = find(&class_names, &g.class, "class")?;
                let l = find(&locations, &g.location, "location")?;
                let slot = slots
                    .iter()
                    .position(|&s| s == (c, l))
                    .ok_or_else(|| PredictionError::UnknownName(format!("slot {}@{}", g.class, g.location)))?;
                terms.push((slot, g.min));
            }
            goal.push(terms);
        }

        let carry = match &spec.start.carry {
            Some(c) => find(&class_names, c, "class")? + 1,
            None => 0,
        };
        let mut counts = vec![0u8; slots.len()];
        for (cname, per_loc) in &spec.start.counts {
            let c = find(&class_names, cname, "class")?;
            for (lname, n) in per_loc {
                let l = find(&locations, lname, "location")?;
                let slot = slots
                    .iter()
                    .position(|&s| s == (c, l))
                    .ok_or_else(|| PredictionError::UnknownName(format!("slot {cname}@{lname}")))?;
                counts[slot] = *n as u8;
            }
        }
        let start = HighLevelState {
            counts,
            human: find(&locations, &spec.start.human, "location")?,
            carry,
        };

        let mut mdp = Mdp {
            spec,
            locations,
            classes,
            slots,
            start: start.clone(),
            goal,
            states: Vec::new(),
            index: HashMap::new(),
            actions: Vec::new(),
            next: Vec::new(),
            terminal: Vec::new(),
            state_features: Vec::new(),
        };
        mdp.check_consistent(&start)?;
        mdp.enumerate()?;
        Ok(mdp)
    }

    fn total(&self, class: usize) -> usize {
        self.classes[class].objects.len()
    }

    /// Class totals are conserved.
    pub fn check_consistent(&self, s: &HighLevelState) -> Result<(), PredictionError> {
        if s.counts.len() != self.slots.len() || s.human >= self.locations.len() || s.carry > self.classes.len() {
            return Err(PredictionError::InvalidState(s.to_string()));
        }
        for c in 0..self.classes.len() {
            let sum: usize = self
                .slots
                .iter()
                .zip(&s.counts)
                .filter(|((sc, _), _)| *sc == c)
                .map(|(_, n)| *n as usize)
                .sum();
            let carried = usize::from(s.carry == c + 1);
            if sum + carried != self.total(c) {
                return Err(PredictionError::InvalidState(s.to_string()));
            }
        }
        Ok(())
    }

    fn enumerate(&mut self) -> Result<(), PredictionError> {
        // Size estimate: product of per-class distributions, locations and carry values.
        let mut estimate: f64 = (self.locations.len() * (self.classes.len() + 1)) as f64;
        for (c, class) in self.classes.iter().enumerate() {
            let k = class.locations.len() as f64;
            let n = self.total(c) as f64;
            // Multisets of size ≤ n over k bins, bounded by (n+1)^k.
            estimate *= (n + 1.0).powf(k);
        }
        if estimate > 50.0 * MAX_STATES as f64 {
            return Err(PredictionError::NonEnumerable(estimate as usize));
        }

        self.actions = (0..self.locations.len())
            .map(HighLevelAction::GoTo)
            .chain((0..self.classes.len()).map(HighLevelAction::PickUp))
            .chain(std::iter::once(HighLevelAction::Place))
            .collect();

        let mut states = Vec::new();
        for carry in 0..=self.classes.len() {
            let mut per_class: Vec<Vec<Vec<u8>>> = Vec::new();
            for (c, class) in self.classes.iter().enumerate() {
                let n = self.total(c) - usize::from(carry == c + 1);
                per_class.push(compositions(n, class.locations.len()));
            }
            let mut acc: Vec<Vec<u8>> = vec![Vec::new()];
            for options in &per_class {
                let mut out = Vec::with_capacity(acc.len() * options.len());
                for a in &acc {
                    for o in options {
                        let mut v = a.clone();
                        v.extend_from_slice(o);
                        out.push(v);
                    }
                }
                acc = out;
                if acc.len() * self.locations.len() > MAX_STATES {
                    return Err(PredictionError::NonEnumerable(acc.len() * self.locations.len()));
                }
            }
            for counts in acc {
                for human in 0..self.locations.len() {
                    states.push(HighLevelState {
                        counts: counts.clone(),
                        human,
                        carry,
                    });
                }
            }
        }
        if states.len() > MAX_STATES {
            return Err(PredictionError::NonEnumerable(states.len()));
        }
        states.sort();
        self.index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        self.terminal = states.iter().map(|s| self.is_goal(s)).collect();
        self.next = states
            .iter()
            .zip(&self.terminal)
            .map(|(s, &term)| {
                self.actions
                    .iter()
                    .map(|a| {
                        if term {
                            None
                        } else {
                            self.step(s, *a).map(|n| self.index[&n])
                        }
                    })
                    .collect()
            })
            .collect();
        self.state_features = states.iter().map(|s| self.features(s)).collect();
        self.states = states;
        Ok(())
    }

    pub fn slot_of(&self, class: usize, location: usize) -> Option<usize> {
        self.slots.iter().position(|&s| s == (class, location))
    }

    /// Successor under `a`, or `None` if `a` is illegal in `s`.
    pub fn step(&self, s: &HighLevelState, a: HighLevelAction) -> Option<HighLevelState> {
        let mut n = s.clone();
        match a {
            HighLevelAction::GoTo(l) => {
                if l == s.human || l >= self.locations.len() {
                    return None;
                }
                n.human = l;
            }
            HighLevelAction::PickUp(c) => {
                if s.carry != 0 || c >= self.classes.len() {
                    return None;
                }
                let slot = self.slot_of(c, s.human)?;
                if n.counts[slot] == 0 {
                    return None;
                }
                n.counts[slot] -= 1;
                n.carry = c + 1;
            }
            HighLevelAction::Place => {
                if s.carry == 0 {
                    return None;
                }
                let slot = self.slot_of(s.carry - 1, s.human)?;
                n.counts[slot] += 1;
                n.carry = 0;
            }
        }
        Some(n)
    }

    pub fn is_goal(&self, s: &HighLevelState) -> bool {
        self.goal
            .iter()
            .any(|alt| alt.iter().all(|&(slot, min)| s.counts[slot] as usize >= min))
    }

    /// `(slot, min)` terms of goal alternative `alt`.
    pub fn goal_terms(&self, alt: usize) -> Vec<(usize, usize)> {
        self.goal.get(alt).cloned().unwrap_or_default()
    }

    pub fn state_index(&self, s: &HighLevelState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn action_index(&self, a: HighLevelAction) -> usize {
        self.actions.iter().position(|b| *b == a).expect("action in list")
    }

    pub fn parse_action(&self, text: &str) -> Result<HighLevelAction, PredictionError> {
        let text = text.trim();
        if text == "place" {
            return Ok(HighLevelAction::Place);
        }
        if let Some(l) = text.strip_prefix("go-to ") {
            return Ok(HighLevelAction::GoTo(find(&self.locations, l.trim(), "location")?));
        }
        if let Some(c) = text.strip_prefix("pick-up ") {
            let names: Vec<String> = self.classes.iter().map(|c| c.name.clone()).collect();
            return Ok(HighLevelAction::PickUp(find(&names, c.trim(), "class")?));
        }
        Err(PredictionError::UnknownName(format!("action `{text}`")))
    }

    pub fn format_action(&self, a: HighLevelAction) -> String {
        match a {
            HighLevelAction::GoTo(l) => format!("go-to {}", self.locations[l]),
            HighLevelAction::PickUp(c) => format!("pick-up {}", self.classes[c].name),
            HighLevelAction::Place => "place".to_string(),
        }
    }

    /// Count of feature slots: one-hot per tuple component value.
    pub fn feature_dim(&self) -> usize {
        self.slots
            .iter()
            .map(|&(c, _)| self.total(c) + 1)
            .sum::<usize>()
            + self.locations.len()
            + self.classes.len()
            + 1
    }

    /// Active feature indices of `s` (one per component).
    pub fn features(&self, s: &HighLevelState) -> Vec<usize> {
        let mut out = Vec::with_capacity(s.counts.len() + 2);
        let mut base = 0;
        for (i, &(c, _)) in self.slots.iter().enumerate() {
            out.push(base + s.counts[i] as usize);
            base += self.total(c) + 1;
        }
        out.push(base + s.human);
        base += self.locations.len();
        out.push(base + s.carry);
        out
    }
}

/// All vectors of `k` non-negative counts summing to `n`.
fn compositions(n: usize, k: usize) -> Vec<Vec<u8>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first as u8);
            out.push(rest);
        }
    }
    out
}

/// A demonstration: start state and action sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoSpec {
    /// Defaults to the MDP start when absent.
    #[serde(default)]
    pub start: Option<HighLevelState>,
    pub actions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoFile {
    pub demos: Vec<DemoSpec>,
}

/// A validated demonstration as state indices and actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Demonstration {
    pub states: Vec<usize>,
    pub actions: Vec<HighLevelAction>,
}

impl Demonstration {
    /// Replays `actions` from `start`; errors on an illegal transition.
    pub fn replay(mdp: &Mdp, start: &HighLevelState, actions: &[HighLevelAction]) -> Result<Self, PredictionError> {
        mdp.check_consistent(start)?;
        let mut s = mdp
            .state_index(start)
            .ok_or_else(|| PredictionError::InvalidState(start.to_string()))?;
        let mut states = vec![s];
        for (k, a) in actions.iter().enumerate() {
            let ai = mdp.action_index(*a);
            s = mdp.next[s][ai].ok_or_else(|| PredictionError::IllegalTransition {
                step: k,
                action: mdp.format_action(*a),
                state: mdp.states[s].to_string(),
            })?;
            states.push(s);
        }
        Ok(Demonstration {
            states,
            actions: actions.to_vec(),
        })
    }

    pub fn from_spec(mdp: &Mdp, spec: &DemoSpec) -> Result<Self, PredictionError> {
        let start = spec.start.clone().unwrap_or_else(|| mdp.start.clone());
        let actions = spec
            .actions
            .iter()
            .map(|a| mdp.parse_action(a))
            .collect::<Result<Vec<_>, _>>()?;
        Self::replay(mdp, &start, &actions)
    }

    pub fn to_spec(&self, mdp: &Mdp) -> DemoSpec {
        DemoSpec {
            start: Some(mdp.states[self.states[0]].clone()),
            actions: self.actions.iter().map(|a| mdp.format_action(*a)).collect(),
        }
    }
}
