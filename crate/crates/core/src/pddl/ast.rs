//! Domain model for the PDDL subset.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A grounded proposition such as `(on cup-green table)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<S: Into<String>>(predicate: S, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// Parses `"(on cup table)"` or `"on cup table"`. Only whitespace separation.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let s = s.strip_prefix('(').unwrap_or(s);
        let s = s.strip_suffix(')').unwrap_or(s);
        let mut it = s.split_whitespace();
        let predicate = it.next()?.to_string();
        Some(Atom {
            predicate,
            args: it.map(str::to_string).collect(),
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A typed name: a constant (`table - location`) or a variable (`?l - location`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<TypedName>,
}

impl PredicateSchema {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    /// `?*`: matches every constant of the slot's type. Negated effects only.
    Wildcard,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Wildcard => write!(f, "?*"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub positive: bool,
    pub predicate: String,
    pub args: Vec<Term>,
    /// Wrapped in `(at start ...)`. Evaluated as an ordinary precondition.
    pub at_start: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut inner = format!("({}", self.predicate);
        for a in &self.args {
            inner.push(' ');
            inner.push_str(&a.to_string());
        }
        inner.push(')');
        if !self.positive {
            inner = format!("(not {inner})");
        }
        if self.at_start {
            write!(f, "(at start {inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub preconditions: Vec<Literal>,
    pub effects: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<String>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateSchema>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn constant_type(&self, name: &str) -> Option<&str> {
        self.constants
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.ty.as_str())
    }

    /// Constants of exactly type `ty`, in declaration order.
    pub fn constants_of(&self, ty: &str) -> Vec<&str> {
        self.constants
            .iter()
            .filter(|c| c.ty == ty)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn has_predicate(&self, name: &str) -> bool {
        self.predicate(name).is_some()
    }

    /// Checks that `atom` names a declared predicate with type-compatible constants.
    pub fn validates(&self, atom: &Atom) -> bool {
        let Some(p) = self.predicate(&atom.predicate) else {
            return false;
        };
        p.arity() == atom.args.len()
            && p
                .params
                .iter()
                .zip(&atom.args)
                .all(|(param, arg)| self.constant_type(arg) == Some(param.ty.as_str()))
    }

    /// Every grounding of every predicate, in declaration order.
    pub fn all_atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for p in &self.predicates {
            let domains: Vec<Vec<&str>> =
                p.params.iter().map(|t| self.constants_of(&t.ty)).collect();
            for tuple in cartesian(&domains) {
                out.push(Atom {
                    predicate: p.name.clone(),
                    args: tuple.into_iter().map(str::to_string).collect(),
                });
            }
        }
        out
    }
}

/// Cartesian product in lexicographic index order.
pub(crate) fn cartesian<'a>(domains: &[Vec<&'a str>]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for d in domains {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for v in d {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn write_typed_list(f: &mut fmt::Formatter<'_>, items: &[TypedName]) -> fmt::Result {
    let mut i = 0;
    while i < items.len() {
        let ty = &items[i].ty;
        let mut j = i;
        while j < items.len() && &items[j].ty == ty {
            write!(f, "{} ", items[j].name)?;
            j += 1;
        }
        write!(f, "- {ty}")?;
        if j < items.len() {
            write!(f, " ")?;
        }
        i = j;
    }
    Ok(())
}

fn write_conjunction(f: &mut fmt::Formatter<'_>, lits: &[Literal]) -> fmt::Result {
    if lits.is_empty() {
        return write!(f, "()");
    }
    write!(f, "(and")?;
    for l in lits {
        write!(f, " {l}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            writeln!(f, "  (:types {})", self.types.join(" "))?;
        }
        if !self.constants.is_empty() {
            write!(f, "  (:constants ")?;
            write_typed_list(f, &self.constants)?;
            writeln!(f, ")")?;
        }
        write!(f, "  (:predicates")?;
        for p in &self.predicates {
            write!(f, "\n    ({}", p.name)?;
            if !p.params.is_empty() {
                write!(f, " ")?;
                write_typed_list(f, &p.params)?;
            }
            write!(f, ")")?;
        }
        writeln!(f, ")")?;
        for a in &self.actions {
            writeln!(f, "  (:action {}", a.name)?;
            write!(f, "    :parameters (")?;
            write_typed_list(f, &a.params)?;
            writeln!(f, ")")?;
            write!(f, "    :precondition ")?;
            write_conjunction(f, &a.preconditions)?;
            write!(f, "\n    :effect ")?;
            write_conjunction(f, &a.effects)?;
            writeln!(f, ")")?;
        }
        write!(f, ")")
    }
}

/// Parsed problem: grounded initial facts and goal facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub init: BTreeSet<Atom>,
    pub goal: BTreeSet<Atom>,
}
