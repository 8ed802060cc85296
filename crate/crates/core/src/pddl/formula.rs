//! Condition formulas: atoms combined with `and`, `or`, `not`, plus `when`
//! and `transform` in effects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::sexpr::{read_all, Sexp};
use super::PddlError;
use crate::kg;
use crate::world::{Atom, GroundEffect, WorldState, ABSENT, AGENT, CONSUMED, YIELDS};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    fn parse(s: &str) -> Term {
        match s.strip_prefix('?') {
            Some(v) => Term::Var(v.to_string()),
            None => {
                let lower = s.to_lowercase();
                if kg::split_instance(&lower).is_some() {
                    Term::Const(lower)
                } else {
                    Term::Const(s.to_string())
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AtomTerm {
    pub pred: String,
    pub args: Vec<Term>,
}

impl AtomTerm {
    pub fn ground(&self) -> Option<Atom> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Atom {
            pred: self.pred.clone(),
            args,
        })
    }
}

impl fmt::Display for AtomTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom(AtomTerm),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    When(Box<Formula>, Box<Formula>),
    /// Replaces an object by its `yields` products (cracking, slicing).
    Transform(Term),
}

impl Formula {
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn contains_when(&self) -> bool {
        match self {
            Formula::When(..) => true,
            Formula::Not(f) => f.contains_when(),
            Formula::And(v) | Formula::Or(v) => v.iter().any(Formula::contains_when),
            Formula::Atom(_) | Formula::Transform(_) => false,
        }
    }

    pub fn atoms(&self) -> Vec<&AtomTerm> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a AtomTerm>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|f| f.collect_atoms(out)),
            Formula::When(c, e) => {
                c.collect_atoms(out);
                e.collect_atoms(out);
            }
            Formula::Transform(_) => {}
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .atoms()
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                Term::Var(v) => Some(v.clone()),
                Term::Const(_) => None,
            })
            .collect();
        self.collect_transform_vars(&mut out);
        out
    }

    fn collect_transform_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Transform(Term::Var(v)) => {
                out.insert(v.clone());
            }
            Formula::Not(f) => f.collect_transform_vars(out),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|f| f.collect_transform_vars(out)),
            Formula::When(c, e) => {
                c.collect_transform_vars(out);
                e.collect_transform_vars(out);
            }
            _ => {}
        }
    }

    /// Substitutes variables; unbound variables are left in place.
    pub fn substitute(&self, binding: &BTreeMap<String, String>) -> Formula {
        let sub = |t: &Term| match t {
            Term::Var(v) => binding.get(v).map_or_else(|| t.clone(), |c| Term::Const(c.clone())),
            Term::Const(_) => t.clone(),
        };
        match self {
            Formula::Atom(a) => Formula::Atom(AtomTerm {
                pred: a.pred.clone(),
                args: a.args.iter().map(sub).collect(),
            }),
            Formula::Not(f) => Formula::Not(Box::new(f.substitute(binding))),
            Formula::And(v) => Formula::And(v.iter().map(|f| f.substitute(binding)).collect()),
            Formula::Or(v) => Formula::Or(v.iter().map(|f| f.substitute(binding)).collect()),
            Formula::When(c, e) => Formula::When(Box::new(c.substitute(binding)), Box::new(e.substitute(binding))),
            Formula::Transform(t) => Formula::Transform(sub(t)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "(not {x})"),
            Formula::And(v) | Formula::Or(v) => {
                let op = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                write!(f, "({op}")?;
                for x in v {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Formula::When(c, e) => write!(f, "(when {c} {e})"),
            Formula::Transform(t) => write!(f, "(transform {t})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unground atom {0}")]
    Unground(String),
    #[error("`when` is only allowed in effects")]
    WhenInCondition,
    #[error("`transform` is only allowed in effects")]
    TransformInCondition,
    #[error("`or` is not allowed in effects")]
    OrInEffect,
    #[error("derived predicate `{0}` cannot be an effect")]
    DerivedInEffect(String),
    #[error("effect deletes and adds {0}")]
    Contradiction(String),
}

/// Where a formula is used; decides which connectives are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Condition,
    Effect,
}

/// Parsing context: declared predicate arities and, when given, the
/// variables in scope.
pub struct Scope<'a> {
    pub predicates: &'a BTreeMap<String, usize>,
    pub vars: Option<&'a BTreeSet<String>>,
}

pub fn parse_formula_sexp(e: &Sexp, scope: &Scope, role: Role) -> Result<Formula, PddlError> {
    let err = |msg: String| PddlError::Syntax { pos: e.pos(), msg };
    let items = e.as_list().ok_or_else(|| err(format!("expected a formula, found `{}`", e.as_sym().unwrap_or(""))))?;
    let Some(head) = items.first() else {
        return Err(err("empty formula".into()));
    };
    let head = head.as_sym().ok_or_else(|| err("formula head must be a symbol".into()))?;
    let rest = &items[1..];
    match head.to_lowercase().as_str() {
        "and" => Ok(Formula::And(
            rest.iter().map(|x| parse_formula_sexp(x, scope, role)).collect::<Result<_, _>>()?,
        )),
        "or" => {
            if role == Role::Effect {
                return Err(err("`or` is not allowed in effects".into()));
            }
            Ok(Formula::Or(
                rest.iter().map(|x| parse_formula_sexp(x, scope, role)).collect::<Result<_, _>>()?,
            ))
        }
        "not" => {
            if rest.len() != 1 {
                return Err(err("`not` takes one argument".into()));
            }
            let inner = parse_formula_sexp(&rest[0], scope, role)?;
            if role == Role::Effect && !matches!(inner, Formula::Atom(_)) {
                return Err(err("effects may only negate atoms".into()));
            }
            Ok(Formula::Not(Box::new(inner)))
        }
        "when" => {
            if role != Role::Effect {
                return Err(err("`when` is only allowed in effects".into()));
            }
            if rest.len() != 2 {
                return Err(err("`when` takes a condition and an effect".into()));
            }
            Ok(Formula::When(
                Box::new(parse_formula_sexp(&rest[0], scope, Role::Condition)?),
                Box::new(parse_formula_sexp(&rest[1], scope, Role::Effect)?),
            ))
        }
        "transform" => {
            if role != Role::Effect {
                return Err(err("`transform` is only allowed in effects".into()));
            }
            match rest {
                [Sexp::Sym(s, _)] => {
                    let t = Term::parse(s);
                    check_term(&t, scope).map_err(&err)?;
                    Ok(Formula::Transform(t))
                }
                _ => Err(err("`transform` takes one object".into())),
            }
        }
        _ => {
            let pred = head.to_lowercase();
            let Some(&arity) = scope.predicates.get(&pred) else {
                return Err(PddlError::UndeclaredPredicate { pos: e.pos(), name: pred });
            };
            if arity != rest.len() {
                return Err(err(format!("`{pred}` expects {arity} arguments, found {}", rest.len())));
            }
            if role == Role::Effect && crate::pddl::is_derived(&pred) {
                return Err(err(format!("derived predicate `{pred}` cannot be an effect")));
            }
            let mut args = Vec::new();
            for a in rest {
                let s = a.as_sym().ok_or_else(|| err("atom arguments must be symbols".into()))?;
                let t = Term::parse(s);
                check_term(&t, scope).map_err(&err)?;
                args.push(t);
            }
            Ok(Formula::Atom(AtomTerm { pred, args }))
        }
    }
}

fn check_term(t: &Term, scope: &Scope) -> Result<(), String> {
    if let (Term::Var(v), Some(vars)) = (t, scope.vars) {
        if !vars.contains(v) {
            return Err(format!("undeclared parameter `?{v}`"));
        }
    }
    Ok(())
}

/// Parses a standalone formula text (e.g. a generated macro condition).
pub fn parse_formula(text: &str, predicates: &BTreeMap<String, usize>, role: Role) -> Result<Formula, PddlError> {
    let exprs = read_all(text).map_err(PddlError::from)?;
    match exprs.as_slice() {
        [e] => parse_formula_sexp(
            e,
            &Scope {
                predicates,
                vars: None,
            },
            role,
        ),
        [] => Err(PddlError::Empty),
        [_, second, ..] => Err(PddlError::Syntax {
            pos: second.pos(),
            msg: "trailing input after formula".into(),
        }),
    }
}

/// Evaluates a ground condition with the usual truth tables.
pub fn eval_condition(f: &Formula, state: &WorldState) -> Result<bool, EvalError> {
    match f {
        Formula::Atom(a) => {
            let g = a.ground().ok_or_else(|| EvalError::Unground(a.to_string()))?;
            Ok(state.holds(&g))
        }
        Formula::Not(x) => Ok(!eval_condition(x, state)?),
        Formula::And(v) => {
            for x in v {
                if !eval_condition(x, state)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(v) => {
            for x in v {
                if eval_condition(x, state)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::When(..) => Err(EvalError::WhenInCondition),
        Formula::Transform(_) => Err(EvalError::TransformInCondition),
    }
}

/// The first failing sub-formula(s) in left-to-right order, or `None` when
/// the condition holds. A failed `or` reports each failed disjunct.
pub fn first_failure(f: &Formula, state: &WorldState) -> Result<Option<Vec<Formula>>, EvalError> {
    match f {
        Formula::Atom(_) | Formula::Not(_) => Ok((!eval_condition(f, state)?).then(|| vec![f.clone()])),
        Formula::And(v) => {
            for x in v {
                if let Some(fail) = first_failure(x, state)? {
                    return Ok(Some(fail));
                }
            }
            Ok(None)
        }
        Formula::Or(v) => {
            let mut all = Vec::new();
            for x in v {
                match first_failure(x, state)? {
                    None => return Ok(None),
                    Some(fail) => all.extend(fail),
                }
            }
            Ok(Some(all))
        }
        Formula::When(..) => Err(EvalError::WhenInCondition),
        Formula::Transform(_) => Err(EvalError::TransformInCondition),
    }
}

/// Collects the ground add/delete lists of an effect against the state
/// before the action. `when` antecedents are evaluated on that state.
pub fn collect_effect(f: &Formula, before: &WorldState) -> Result<GroundEffect, EvalError> {
    let mut eff = GroundEffect::default();
    collect_into(f, before, false, &mut eff)?;
    for d in &eff.dels {
        if eff.adds.contains(d) {
            return Err(EvalError::Contradiction(d.to_string()));
        }
    }
    Ok(eff)
}

fn collect_into(f: &Formula, before: &WorldState, conditional: bool, eff: &mut GroundEffect) -> Result<(), EvalError> {
    let (adds, dels) = if conditional {
        (&mut eff.cond_adds, &mut eff.cond_dels)
    } else {
        (&mut eff.adds, &mut eff.dels)
    };
    match f {
        Formula::Atom(a) => {
            if crate::pddl::is_derived(&a.pred) {
                return Err(EvalError::DerivedInEffect(a.pred.clone()));
            }
            adds.push(a.ground().ok_or_else(|| EvalError::Unground(a.to_string()))?);
        }
        Formula::Not(x) => match x.as_ref() {
            Formula::Atom(a) => dels.push(a.ground().ok_or_else(|| EvalError::Unground(a.to_string()))?),
            _ => return Err(EvalError::Unground(x.to_string())),
        },
        Formula::And(v) => {
            for x in v {
                collect_into(x, before, conditional, eff)?;
            }
        }
        Formula::Or(_) => return Err(EvalError::OrInEffect),
        Formula::When(c, e) => {
            if eval_condition(c, before)? {
                collect_into(e, before, true, eff)?;
            }
        }
        Formula::Transform(t) => {
            let Term::Const(o) = t else {
                return Err(EvalError::Unground(t.to_string()));
            };
            expand_transform(o, before, adds, dels);
        }
    }
    Ok(())
}

/// Products inherit the object's location (only the first takes a held
/// slot); the object loses its location and becomes `consumed`; an agent
/// standing at the object moves to the first product.
fn expand_transform(o: &str, before: &WorldState, adds: &mut Vec<Atom>, dels: &mut Vec<Atom>) {
    let products: Vec<String> = before
        .atoms()
        .filter(|a| a.pred == YIELDS && a.args.len() == 2 && a.args[0] == o)
        .map(|a| a.args[1].clone())
        .collect();
    let loc = before.location_of(o).cloned();
    for (i, p) in products.iter().enumerate() {
        if before.state_of(p) == Some(ABSENT) {
            dels.push(Atom::binary(kg::STATE, p, ABSENT));
        }
        if let Some(l) = &loc {
            if l.pred != kg::HELD_BY || i == 0 {
                adds.push(Atom::binary(&l.pred, p, &l.args[1]));
            }
        }
    }
    if let Some(l) = loc {
        dels.push(l);
    }
    adds.push(Atom::binary(kg::STATE, o, CONSUMED));
    if let (Some(first), Some(at)) = (products.first(), before.agent_location()) {
        if at == o {
            adds.push(Atom::binary(kg::AT, AGENT, first));
        }
    }
}
