//! PDDL subset: parsing domain/problem files and grounding actions.

mod ast;
mod error;
mod ground;
mod parser;
mod sexpr;

pub use ast::{ActionSchema, Atom, Domain, Literal, PredicateSchema, Problem, Term, TypedName};
pub use error::PddlError;
pub use ground::{ground_actions, GroundedAction};
pub use parser::{parse_domain, parse_problem};
pub use sexpr::Pos;

/// The set-table domain shipped with the crate, with hyphenated identifiers.
pub const SET_TABLE_DOMAIN: &str = include_str!("../../fixtures/pddl/set_table.pddl");
