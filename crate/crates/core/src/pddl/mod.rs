//! PDDL-subset domains: typed action schemas with `and`/`or`/`not`
//! preconditions and `and`/`when` effects, condition evaluation, and
//! grounding of the finite action catalog.

mod catalog;
mod formula;
pub mod sexpr;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{ground_catalog, sentence_form, ActionCatalog, GroundedAction};
pub use formula::{
    collect_effect, eval_condition, first_failure, parse_formula, AtomTerm, EvalError, Formula, Role, Term,
};
use sexpr::{read_all, Pos, Sexp, SyntaxError};

use crate::world::{HAND_EMPTY, REACHABLE};

/// Predicates computed from the state rather than stored.
pub fn is_derived(pred: &str) -> bool {
    pred == HAND_EMPTY || pred == REACHABLE
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared predicate `{name}`")]
    UndeclaredPredicate { pos: Pos, name: String },
    #[error("empty input")]
    Empty,
}

impl From<SyntaxError> for PddlError {
    fn from(e: SyntaxError) -> Self {
        PddlError::Syntax { pos: e.pos, msg: e.msg }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    /// Class constraint, checked against the taxonomy when grounding.
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<Parameter>,
    pub precondition: Formula,
    pub effect: Formula,
}

impl ActionSchema {
    pub fn arity(&self) -> usize {
        self.parameters.len()
    }

    pub fn binding(&self, args: &[String]) -> BTreeMap<String, String> {
        self.parameters
            .iter()
            .zip(args)
            .map(|(p, a)| (p.name.clone(), a.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub constants: Vec<String>,
    pub predicates: BTreeMap<String, usize>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// Canonical text form; `parse_domain` of it yields an equal domain.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "(define (domain {})", self.name);
        if !self.constants.is_empty() {
            let _ = writeln!(s, "  (:constants {})", self.constants.join(" "));
        }
        s.push_str("  (:predicates");
        for (p, n) in &self.predicates {
            s.push_str(" (");
            s.push_str(p);
            for i in 0..*n {
                let _ = write!(s, " ?x{i}");
            }
            s.push(')');
        }
        s.push_str(")\n");
        for a in &self.actions {
            let _ = writeln!(s, "  (:action {}", a.name);
            s.push_str("    :parameters (");
            let params: Vec<String> = a.parameters.iter().map(|p| format!("?{} - {}", p.name, p.class)).collect();
            s.push_str(&params.join(" "));
            s.push_str(")\n");
            let _ = writeln!(s, "    :precondition {}", a.precondition);
            let _ = writeln!(s, "    :effect {})", a.effect);
        }
        s.push_str(")\n");
        s
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Syntax { pos, msg: msg.into() }
}

fn sym<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    e.as_sym().ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

/// Parses a `(define (domain ...) ...)` text.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let exprs = read_all(text)?;
    let top = match exprs.as_slice() {
        [one] => one,
        [] => return Err(PddlError::Empty),
        [_, second, ..] => return Err(syntax(second.pos(), "trailing input after domain")),
    };
    let items = top.as_list().ok_or_else(|| syntax(top.pos(), "expected `(define ...)`"))?;
    if items.first().and_then(Sexp::as_sym).map(str::to_lowercase).as_deref() != Some("define") {
        return Err(syntax(top.pos(), "expected `define`"));
    }
    let name = match items.get(1).and_then(Sexp::as_list) {
        Some([kw, n]) if kw.as_sym().is_some_and(|k| k.eq_ignore_ascii_case("domain")) => sym(n, "domain name")?.to_string(),
        _ => return Err(syntax(top.pos(), "expected `(domain <name>)`")),
    };
    let mut domain = Domain {
        name,
        constants: Vec::new(),
        predicates: BTreeMap::new(),
        actions: Vec::new(),
    };
    let mut action_exprs = Vec::new();
    for sec in &items[2..] {
        let list = sec.as_list().ok_or_else(|| syntax(sec.pos(), "expected a section"))?;
        let head = list.first().map(|h| sym(h, "section keyword")).transpose()?.unwrap_or("");
        match head.to_lowercase().as_str() {
            ":requirements" | ":types" => {}
            ":constants" => {
                for c in &list[1..] {
                    let c = sym(c, "constant")?;
                    if c != "-" && !c.starts_with(char::is_uppercase) {
                        domain.constants.push(c.to_string());
                    }
                }
            }
            ":predicates" => {
                for p in &list[1..] {
                    let pl = p.as_list().ok_or_else(|| syntax(p.pos(), "expected `(pred ?args)`"))?;
                    let Some((name, rest)) = pl.split_first() else {
                        return Err(syntax(p.pos(), "empty predicate declaration"));
                    };
                    let name = sym(name, "predicate name")?.to_lowercase();
                    let arity = rest
                        .iter()
                        .filter(|a| a.as_sym().is_some_and(|s| s.starts_with('?')))
                        .count();
                    domain.predicates.insert(name, arity);
                }
            }
            ":action" => action_exprs.push(sec),
            other => return Err(syntax(sec.pos(), format!("unknown section `{other}`"))),
        }
    }
    for a in action_exprs {
        let schema = parse_action(a, &domain.predicates)?;
        if domain.action(&schema.name).is_some() {
            return Err(syntax(a.pos(), format!("duplicate action `{}`", schema.name)));
        }
        domain.actions.push(schema);
    }
    Ok(domain)
}

fn parse_action(e: &Sexp, predicates: &BTreeMap<String, usize>) -> Result<ActionSchema, PddlError> {
    let list = e.as_list().unwrap_or(&[]);
    let name = list
        .get(1)
        .ok_or_else(|| syntax(e.pos(), "action without a name"))
        .and_then(|n| sym(n, "action name"))?
        .to_lowercase();
    let mut parameters = Vec::new();
    let mut precondition = Formula::truth();
    let mut effect = Formula::truth();
    let mut i = 2;
    let mut pending: Vec<(&str, &Sexp)> = Vec::new();
    while i < list.len() {
        let key = sym(&list[i], "`:parameters`, `:precondition` or `:effect`")?;
        let val = list.get(i + 1).ok_or_else(|| syntax(list[i].pos(), format!("missing value for `{key}`")))?;
        pending.push((key, val));
        i += 2;
    }
    for (key, val) in &pending {
        if key.eq_ignore_ascii_case(":parameters") {
            parameters = parse_parameters(val)?;
        }
    }
    let vars: BTreeSet<String> = parameters.iter().map(|p| p.name.clone()).collect();
    let scope = formula::Scope {
        predicates,
        vars: Some(&vars),
    };
    for (key, val) in pending {
        match key.to_lowercase().as_str() {
            ":parameters" => {}
            ":precondition" => precondition = formula::parse_formula_sexp(val, &scope, Role::Condition)?,
            ":effect" => effect = formula::parse_formula_sexp(val, &scope, Role::Effect)?,
            other => return Err(syntax(val.pos(), format!("unknown action key `{other}`"))),
        }
    }
    check_disjoint(&effect, e.pos())?;
    Ok(ActionSchema {
        name,
        parameters,
        precondition,
        effect,
    })
}

fn check_disjoint(effect: &Formula, pos: Pos) -> Result<(), PddlError> {
    let Formula::And(items) = effect else {
        return Ok(());
    };
    let adds: BTreeSet<&AtomTerm> = items
        .iter()
        .filter_map(|f| match f {
            Formula::Atom(a) => Some(a),
            _ => None,
        })
        .collect();
    for f in items {
        if let Formula::Not(x) = f {
            if let Formula::Atom(a) = x.as_ref() {
                if adds.contains(a) {
                    return Err(syntax(pos, format!("effect both adds and deletes {a}")));
                }
            }
        }
    }
    Ok(())
}

fn parse_parameters(e: &Sexp) -> Result<Vec<Parameter>, PddlError> {
    let items = e.as_list().ok_or_else(|| syntax(e.pos(), "expected a parameter list"))?;
    let mut out = Vec::new();
    let mut untyped: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let s = sym(&items[i], "parameter")?;
        if s == "-" {
            let class = items
                .get(i + 1)
                .ok_or_else(|| syntax(items[i].pos(), "missing type after `-`"))
                .and_then(|t| sym(t, "type name"))?;
            for v in untyped.drain(..) {
                out.push(Parameter {
                    name: v,
                    class: class.to_string(),
                });
            }
            i += 2;
            continue;
        }
        let v = s
            .strip_prefix('?')
            .ok_or_else(|| syntax(items[i].pos(), format!("parameter `{s}` must start with `?`")))?;
        untyped.push(v.to_string());
        i += 1;
    }
    for v in untyped {
        out.push(Parameter {
            name: v,
            class: "Thing".to_string(),
        });
    }
    Ok(out)
}
