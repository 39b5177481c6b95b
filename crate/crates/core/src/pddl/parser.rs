//! Domain and problem parsers for the PDDL subset.
//!
//! Supported: `:requirements`, `:types` (flat), `:constants`, `:predicates`,
//! `:action` with `:parameters`/`:precondition`/`:effect`, `and`, `not`,
//! `at start`, and the delete wildcard `?*`. Keywords are case-insensitive,
//! identifiers are not.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::*;
use super::error::PddlError;
use super::sexpr::{read, Pos, SExpr};

const IMPLICIT_TYPE: &str = "object";

fn syntax(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn atom_text(e: &SExpr, what: &str) -> Result<String, PddlError> {
    e.as_atom()
        .map(str::to_string)
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}, found a list")))
}

fn list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], PddlError> {
    e.as_list()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what} list")))
}

/// `a b - t c - u d` → [(a,t),(b,t),(c,u),(d,object)] with positions.
fn typed_list(items: &[SExpr]) -> Result<Vec<(TypedName, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let tok = atom_text(&items[i], "name")?;
        if tok == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| syntax(items[i].pos(), "missing type after '-'"))?;
            let ty = atom_text(ty_expr, "type name")?;
            if pending.is_empty() {
                return Err(syntax(items[i].pos(), "'-' without preceding names"));
            }
            for (name, pos) in pending.drain(..) {
                out.push((TypedName { name, ty: ty.clone() }, pos));
            }
            i += 2;
        } else {
            pending.push((tok, items[i].pos()));
            i += 1;
        }
    }
    for (name, pos) in pending {
        out.push((
            TypedName {
                name,
                ty: IMPLICIT_TYPE.to_string(),
            },
            pos,
        ));
    }
    Ok(out)
}

fn expect_header<'a>(root: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr]), PddlError> {
    let items = list(root, "define")?;
    if items.first().map(|e| e.is_keyword("define")) != Some(true) {
        return Err(syntax(root.pos(), "expected (define ...)"));
    }
    let head = items
        .get(1)
        .ok_or_else(|| syntax(root.pos(), format!("missing ({kind} <name>)")))?;
    let head_items = list(head, kind)?;
    if head_items.len() != 2 || !head_items[0].is_keyword(kind) {
        return Err(syntax(head.pos(), format!("expected ({kind} <name>)")));
    }
    Ok((atom_text(&head_items[1], "name")?, &items[2..]))
}

struct Scope<'a> {
    types: &'a HashSet<String>,
    constants: &'a HashMap<String, String>,
    predicates: &'a HashMap<String, PredicateSchema>,
}

impl Scope<'_> {
    fn check_type(&self, ty: &str, pos: Pos) -> Result<(), PddlError> {
        if ty == IMPLICIT_TYPE || self.types.contains(ty) {
            Ok(())
        } else {
            Err(PddlError::UndeclaredType {
                pos,
                name: ty.to_string(),
            })
        }
    }

    /// Parses `(pred args...)` against the declared predicates.
    fn literal_body(
        &self,
        e: &SExpr,
        vars: &HashMap<String, String>,
        allow_wildcard: bool,
    ) -> Result<(String, Vec<Term>), PddlError> {
        let items = list(e, "literal")?;
        let head = items
            .first()
            .ok_or_else(|| syntax(e.pos(), "empty literal"))?;
        let name = atom_text(head, "predicate name")?;
        let schema = self
            .predicates
            .get(&name)
            .ok_or_else(|| PddlError::UndeclaredPredicate {
                pos: head.pos(),
                name: name.clone(),
            })?;
        let args = &items[1..];
        if args.len() != schema.arity() {
            return Err(PddlError::ArityMismatch {
                pos: e.pos(),
                predicate: name,
                expected: schema.arity(),
                found: args.len(),
            });
        }
        let mut terms = Vec::with_capacity(args.len());
        for (arg, param) in args.iter().zip(&schema.params) {
            let tok = atom_text(arg, "term")?;
            let term = if tok == "?*" {
                if !allow_wildcard {
                    return Err(PddlError::WildcardMisuse { pos: arg.pos() });
                }
                Term::Wildcard
            } else if tok.starts_with('?') {
                let ty = vars.get(&tok).ok_or_else(|| PddlError::UnboundVariable {
                    pos: arg.pos(),
                    name: tok.clone(),
                })?;
                if ty != &param.ty {
                    return Err(syntax(
                        arg.pos(),
                        format!("variable {tok} has type {ty}, '{name}' expects {}", param.ty),
                    ));
                }
                Term::Var(tok)
            } else {
                let ty = self
                    .constants
                    .get(&tok)
                    .ok_or_else(|| PddlError::UndeclaredConstant {
                        pos: arg.pos(),
                        name: tok.clone(),
                    })?;
                if ty != &param.ty {
                    return Err(syntax(
                        arg.pos(),
                        format!("constant {tok} has type {ty}, '{name}' expects {}", param.ty),
                    ));
                }
                Term::Const(tok)
            };
            terms.push(term);
        }
        Ok((name, terms))
    }

    /// A signed, optionally `at start`-scoped literal.
    fn literal(
        &self,
        e: &SExpr,
        vars: &HashMap<String, String>,
        in_effect: bool,
    ) -> Result<Literal, PddlError> {
        let items = list(e, "literal")?;
        if items.len() == 3 && items[0].is_keyword("at") && items[1].is_keyword("start") {
            if in_effect {
                return Err(syntax(e.pos(), "'at start' is only supported in preconditions"));
            }
            let mut lit = self.literal(&items[2], vars, in_effect)?;
            lit.at_start = true;
            return Ok(lit);
        }
        if items.first().map(|h| h.is_keyword("not")) == Some(true) {
            if items.len() != 2 {
                return Err(syntax(e.pos(), "'not' takes exactly one argument"));
            }
            let (predicate, args) = self.literal_body(&items[1], vars, in_effect)?;
            return Ok(Literal {
                positive: false,
                predicate,
                args,
                at_start: false,
            });
        }
        let (predicate, args) = self.literal_body(e, vars, false)?;
        Ok(Literal {
            positive: true,
            predicate,
            args,
            at_start: false,
        })
    }

    /// `()`, a single literal, or `(and lit*)`.
    fn conjunction(
        &self,
        e: &SExpr,
        vars: &HashMap<String, String>,
        in_effect: bool,
    ) -> Result<Vec<Literal>, PddlError> {
        let items = list(e, "formula")?;
        if items.is_empty() {
            return Ok(Vec::new());
        }
        if items[0].is_keyword("and") {
            items[1..]
                .iter()
                .map(|l| self.literal(l, vars, in_effect))
                .collect()
        } else {
            Ok(vec![self.literal(e, vars, in_effect)?])
        }
    }
}

fn action(scope: &Scope<'_>, items: &[SExpr], pos: Pos) -> Result<ActionSchema, PddlError> {
    let name = atom_text(
        items.get(1).ok_or_else(|| syntax(pos, "missing action name"))?,
        "action name",
    )?;
    let mut params = Vec::new();
    let mut vars = HashMap::new();
    let mut pre = None;
    let mut eff = None;
    let mut i = 2;
    while i < items.len() {
        let key = &items[i];
        let val = items
            .get(i + 1)
            .ok_or_else(|| syntax(key.pos(), "missing value after action keyword"))?;
        if key.is_keyword(":parameters") {
            for (tn, p) in typed_list(list(val, "parameter")?)? {
                if !tn.name.starts_with('?') {
                    return Err(syntax(p, format!("parameter '{}' must start with '?'", tn.name)));
                }
                scope.check_type(&tn.ty, p)?;
                if vars.insert(tn.name.clone(), tn.ty.clone()).is_some() {
                    return Err(PddlError::Duplicate {
                        pos: p,
                        what: "parameter",
                        name: tn.name,
                    });
                }
                params.push(tn);
            }
        } else if key.is_keyword(":precondition") {
            pre = Some(val);
        } else if key.is_keyword(":effect") {
            eff = Some(val);
        } else {
            return Err(PddlError::UnknownSection {
                pos: key.pos(),
                keyword: key.as_atom().unwrap_or("(list)").to_string(),
            });
        }
        i += 2;
    }
    let preconditions = match pre {
        Some(e) => scope.conjunction(e, &vars, false)?,
        None => Vec::new(),
    };
    let effects = match eff {
        Some(e) => scope.conjunction(e, &vars, true)?,
        None => Vec::new(),
    };
    for l in &effects {
        if l.positive && l.args.contains(&Term::Wildcard) {
            return Err(PddlError::WildcardMisuse { pos });
        }
    }
    Ok(ActionSchema {
        name,
        params,
        preconditions,
        effects,
    })
}

/// Parses a domain file.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = read(text)?;
    let (name, sections) = expect_header(&root, "domain")?;

    let mut requirements = Vec::new();
    let mut types = Vec::new();
    let mut constants = Vec::new();
    let mut predicates = Vec::new();
    let mut action_exprs = Vec::new();

    let mut type_set = HashSet::new();
    let mut const_map = HashMap::new();
    let mut pred_map = HashMap::new();

    for sec in sections {
        let items = list(sec, "section")?;
        let head = items
            .first()
            .ok_or_else(|| syntax(sec.pos(), "empty section"))?;
        if head.is_keyword(":requirements") {
            for r in &items[1..] {
                requirements.push(atom_text(r, "requirement")?);
            }
        } else if head.is_keyword(":types") {
            for t in &items[1..] {
                let t_name = atom_text(t, "type name")?;
                if t_name == "-" {
                    return Err(syntax(t.pos(), "type hierarchies are not supported"));
                }
                if !type_set.insert(t_name.clone()) {
                    return Err(PddlError::Duplicate {
                        pos: t.pos(),
                        what: "type",
                        name: t_name,
                    });
                }
                types.push(t_name);
            }
        } else if head.is_keyword(":constants") {
            for (tn, p) in typed_list(&items[1..])? {
                if tn.ty != IMPLICIT_TYPE && !type_set.contains(&tn.ty) {
                    return Err(PddlError::UndeclaredType { pos: p, name: tn.ty });
                }
                if const_map.insert(tn.name.clone(), tn.ty.clone()).is_some() {
                    return Err(PddlError::Duplicate {
                        pos: p,
                        what: "constant",
                        name: tn.name,
                    });
                }
                constants.push(tn);
            }
        } else if head.is_keyword(":predicates") {
            for p in &items[1..] {
                let pi = list(p, "predicate")?;
                let pname = atom_text(
                    pi.first().ok_or_else(|| syntax(p.pos(), "empty predicate"))?,
                    "predicate name",
                )?;
                let mut seen = HashSet::new();
                let mut params = Vec::new();
                for (tn, pos) in typed_list(&pi[1..])? {
                    if tn.ty != IMPLICIT_TYPE && !type_set.contains(&tn.ty) {
                        return Err(PddlError::UndeclaredType { pos, name: tn.ty });
                    }
                    if !seen.insert(tn.name.clone()) {
                        return Err(PddlError::Duplicate {
                            pos,
                            what: "predicate variable",
                            name: tn.name,
                        });
                    }
                    params.push(tn);
                }
                let schema = PredicateSchema {
                    name: pname.clone(),
                    params,
                };
                if pred_map.insert(pname.clone(), schema.clone()).is_some() {
                    return Err(PddlError::Duplicate {
                        pos: p.pos(),
                        what: "predicate",
                        name: pname,
                    });
                }
                predicates.push(schema);
            }
        } else if head.is_keyword(":action") {
            action_exprs.push(sec);
        } else {
            return Err(PddlError::UnknownSection {
                pos: head.pos(),
                keyword: head.as_atom().unwrap_or("(list)").to_string(),
            });
        }
    }

    let scope = Scope {
        types: &type_set,
        constants: &const_map,
        predicates: &pred_map,
    };
    let mut actions = Vec::new();
    for a in action_exprs {
        let act = action(&scope, a.as_list().unwrap_or_default(), a.pos())?;
        if actions.iter().any(|x: &ActionSchema| x.name == act.name) {
            return Err(PddlError::Duplicate {
                pos: a.pos(),
                what: "action",
                name: act.name,
            });
        }
        actions.push(act);
    }

    Ok(Domain {
        name,
        requirements,
        types,
        constants,
        predicates,
        actions,
    })
}

fn ground_atom(
    domain: &Domain,
    e: &SExpr,
) -> Result<Atom, PddlError> {
    let items = list(e, "fact")?;
    let head = items.first().ok_or_else(|| syntax(e.pos(), "empty fact"))?;
    let name = atom_text(head, "predicate name")?;
    let schema = domain
        .predicate(&name)
        .ok_or_else(|| PddlError::UndeclaredPredicate {
            pos: head.pos(),
            name: name.clone(),
        })?;
    let args = items[1..]
        .iter()
        .map(|a| atom_text(a, "constant"))
        .collect::<Result<Vec<_>, _>>()?;
    if args.iter().any(|a| a.starts_with('?')) {
        let lit = format!("({} {})", name, args.join(" "));
        return Err(PddlError::NonGroundLiteral {
            pos: e.pos(),
            literal: lit,
        });
    }
    if args.len() != schema.arity() {
        return Err(PddlError::ArityMismatch {
            pos: e.pos(),
            predicate: name,
            expected: schema.arity(),
            found: args.len(),
        });
    }
    for (arg, (param, expr)) in args.iter().zip(schema.params.iter().zip(&items[1..])) {
        match domain.constant_type(arg) {
            None => {
                return Err(PddlError::UndeclaredConstant {
                    pos: expr.pos(),
                    name: arg.clone(),
                })
            }
            Some(ty) if ty != param.ty => {
                return Err(syntax(
                    expr.pos(),
                    format!("constant {arg} has type {ty}, '{name}' expects {}", param.ty),
                ))
            }
            _ => {}
        }
    }
    Ok(Atom {
        predicate: name,
        args,
    })
}

fn fact_list(domain: &Domain, e: &SExpr) -> Result<BTreeSet<Atom>, PddlError> {
    let items = list(e, "formula")?;
    if items.is_empty() {
        return Ok(BTreeSet::new());
    }
    if items[0].is_keyword("and") {
        items[1..].iter().map(|f| ground_atom(domain, f)).collect()
    } else {
        Ok(BTreeSet::from([ground_atom(domain, e)?]))
    }
}

/// Parses a problem file against `domain`, returning its grounded init and goal sets.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let root = read(text)?;
    let (name, sections) = expect_header(&root, "problem")?;
    let mut domain_name = domain.name.clone();
    let mut init = BTreeSet::new();
    let mut goal = BTreeSet::new();
    for sec in sections {
        let items = list(sec, "section")?;
        let head = items
            .first()
            .ok_or_else(|| syntax(sec.pos(), "empty section"))?;
        if head.is_keyword(":domain") {
            domain_name = atom_text(
                items.get(1).ok_or_else(|| syntax(sec.pos(), "missing domain name"))?,
                "domain name",
            )?;
        } else if head.is_keyword(":objects") {
            // Objects must already be domain constants; the domain owns the universe.
            for (tn, p) in typed_list(&items[1..])? {
                match domain.constant_type(&tn.name) {
                    Some(ty) if ty == tn.ty || tn.ty == IMPLICIT_TYPE => {}
                    Some(_) => {
                        return Err(syntax(p, format!("object '{}' redeclared with type {}", tn.name, tn.ty)))
                    }
                    None => return Err(PddlError::UndeclaredConstant { pos: p, name: tn.name }),
                }
            }
        } else if head.is_keyword(":init") {
            for f in &items[1..] {
                init.insert(ground_atom(domain, f)?);
            }
        } else if head.is_keyword(":goal") {
            let body = items
                .get(1)
                .ok_or_else(|| syntax(sec.pos(), "missing goal formula"))?;
            goal = fact_list(domain, body)?;
        } else {
            return Err(PddlError::UnknownSection {
                pos: head.pos(),
                keyword: head.as_atom().unwrap_or("(list)").to_string(),
            });
        }
    }
    if domain_name != domain.name {
        return Err(PddlError::DomainMismatch {
            expected: domain.name.clone(),
            found: domain_name,
        });
    }
    Ok(Problem {
        name,
        domain: domain_name,
        init,
        goal,
    })
}
