use thiserror::Error;

use super::sexpr::Pos;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PddlError {
    #[error("{pos}: lexical error: {msg}")]
    Lexical { pos: Pos, msg: String },
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: unknown section keyword '{keyword}'")]
    UnknownSection { pos: Pos, keyword: String },
    #[error("{pos}: undeclared type '{name}'")]
    UndeclaredType { pos: Pos, name: String },
    #[error("{pos}: undeclared predicate '{name}'")]
    UndeclaredPredicate { pos: Pos, name: String },
    #[error("{pos}: undeclared constant '{name}'")]
    UndeclaredConstant { pos: Pos, name: String },
    #[error("{pos}: variable '{name}' is not a parameter of the enclosing action")]
    UnboundVariable { pos: Pos, name: String },
    #[error("{pos}: arity mismatch for '{predicate}': expected {expected}, found {found}")]
    ArityMismatch {
        pos: Pos,
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: wildcard '?*' is only allowed inside negated effects")]
    WildcardMisuse { pos: Pos },
    #[error("{pos}: literal '{literal}' is not grounded")]
    NonGroundLiteral { pos: Pos, literal: String },
    #[error("{pos}: duplicate {what} '{name}'")]
    Duplicate { pos: Pos, what: &'static str, name: String },
    #[error("problem targets domain '{found}' but '{expected}' was supplied")]
    DomainMismatch { expected: String, found: String },
}
