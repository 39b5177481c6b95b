use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pddl::{Atom, GroundedAction};

/// A set of grounded propositions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicState {
    props: BTreeSet<Atom>,
}

impl SymbolicState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.props.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.props.insert(atom)
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.props.remove(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.props.iter()
    }

    pub fn len(&self) -> usize {
        self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.props
    }

    /// True when every goal proposition holds.
    pub fn satisfies(&self, goal: &BTreeSet<Atom>) -> bool {
        goal.is_subset(&self.props)
    }

    /// Propositions of `predicate`, in order.
    pub fn with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.props.iter().filter(move |a| a.predicate == predicate)
    }
}

impl FromIterator<Atom> for SymbolicState {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        SymbolicState {
            props: iter.into_iter().collect(),
        }
    }
}

impl From<BTreeSet<Atom>> for SymbolicState {
    fn from(props: BTreeSet<Atom>) -> Self {
        SymbolicState { props }
    }
}

impl fmt::Display for SymbolicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.props.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("action {0} is not applicable")]
    NotApplicable(String),
}

/// Positive preconditions hold and no negated precondition holds.
pub fn applicable(s: &SymbolicState, a: &GroundedAction) -> bool {
    a.pre_pos.is_subset(&s.props) && a.pre_neg.is_disjoint(&s.props)
}

/// Applies `a` with delete-then-add semantics.
pub fn exec(s: &SymbolicState, a: &GroundedAction) -> Result<SymbolicState, SymbolicError> {
    if !applicable(s, a) {
        return Err(SymbolicError::NotApplicable(a.to_string()));
    }
    let mut props: BTreeSet<Atom> = s.props.difference(&a.del).cloned().collect();
    props.extend(a.add.iter().cloned());
    Ok(SymbolicState { props })
}

/// Number of goal propositions missing from `s`.
pub fn heuristic(s: &SymbolicState, goal: &BTreeSet<Atom>) -> usize {
    goal.difference(&s.props).count()
}
