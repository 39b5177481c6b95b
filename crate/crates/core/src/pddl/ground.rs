//! Grounding of action schemas against the domain constants.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use super::ast::{cartesian, Atom, Domain, Literal, Term};

/// A fully instantiated action with its propositional preconditions and effects.
///
/// The proposition sets are shared so that skeletons clone cheaply.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundedAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre_pos: Arc<BTreeSet<Atom>>,
    pub pre_neg: Arc<BTreeSet<Atom>>,
    pub add: Arc<BTreeSet<Atom>>,
    pub del: Arc<BTreeSet<Atom>>,
}

impl GroundedAction {
    /// Sort key used for deterministic tie ordering: the name followed by the arguments.
    pub fn key(&self) -> (&str, &[String]) {
        (&self.name, &self.args)
    }

    pub fn arg(&self, i: usize) -> Option<&str> {
        self.args.get(i).map(String::as_str)
    }
}

impl fmt::Display for GroundedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(","))
    }
}

fn instantiate(
    domain: &Domain,
    lit: &Literal,
    binding: &HashMap<&str, &str>,
) -> Vec<Atom> {
    let schema = domain
        .predicate(&lit.predicate)
        .expect("literal validated against domain");
    let slots: Vec<Vec<&str>> = lit
        .args
        .iter()
        .zip(&schema.params)
        .map(|(term, param)| match term {
            Term::Var(v) => vec![binding[v.as_str()]],
            Term::Const(c) => vec![c.as_str()],
            Term::Wildcard => domain.constants_of(&param.ty),
        })
        .collect();
    cartesian(&slots)
        .into_iter()
        .map(|args| Atom {
            predicate: lit.predicate.clone(),
            args: args.into_iter().map(str::to_string).collect(),
        })
        .collect()
}

/// Grounds every schema over type-compatible constants, in declaration order.
///
/// Wildcard deletes expand to every constant of the slot's declared type.
pub fn ground_actions(domain: &Domain) -> Vec<GroundedAction> {
    let mut out = Vec::new();
    for schema in &domain.actions {
        let domains: Vec<Vec<&str>> = schema
            .params
            .iter()
            .map(|p| domain.constants_of(&p.ty))
            .collect();
        for tuple in cartesian(&domains) {
            let binding: HashMap<&str, &str> = schema
                .params
                .iter()
                .map(|p| p.name.as_str())
                .zip(tuple.iter().copied())
                .collect();
            let (mut pre_pos, mut pre_neg) = (BTreeSet::new(), BTreeSet::new());
            for lit in &schema.preconditions {
                let set = if lit.positive { &mut pre_pos } else { &mut pre_neg };
                set.extend(instantiate(domain, lit, &binding));
            }
            let (mut add, mut del) = (BTreeSet::new(), BTreeSet::new());
            for lit in &schema.effects {
                let set = if lit.positive { &mut add } else { &mut del };
                set.extend(instantiate(domain, lit, &binding));
            }
            out.push(GroundedAction {
                name: schema.name.clone(),
                args: tuple.iter().map(|s| s.to_string()).collect(),
                pre_pos: Arc::new(pre_pos),
                pre_neg: Arc::new(pre_neg),
                add: Arc::new(add),
                del: Arc::new(del),
            });
        }
    }
    out
}
