//! Ideal-world plan simulation with step-localized violations, and
//! alignment of expected state against observed scene graphs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{self, Triple};
use crate::pddl::{collect_effect, first_failure, ActionCatalog, Domain, EvalError, GroundedAction};
use crate::world::{Atom, GroundEffect, WorldState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructuralError {
    #[error("action `{0}` is not in the catalog")]
    NotInCatalog(String),
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Precondition,
    Postcondition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 0-based index of the failing step.
    pub step: usize,
    pub action: String,
    pub phase: Phase,
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub verified_steps: usize,
    pub plan_length: usize,
    pub violation: Option<Violation>,
    #[serde(skip)]
    pub final_state: WorldState,
}

/// Checks that `action` is applicable and computes its ground effect,
/// without touching the state.
pub fn check_step(
    state: &WorldState,
    action: &GroundedAction,
    domain: &Domain,
    catalog: &ActionCatalog,
) -> Result<Result<GroundEffect, Vec<String>>, StructuralError> {
    if !catalog.contains(action) {
        return Err(StructuralError::NotInCatalog(catalog.canonical(action)));
    }
    let schema = domain
        .action(&action.name)
        .ok_or_else(|| StructuralError::UnknownSchema(action.name.clone()))?;
    let binding = schema.binding(&action.args);
    let pre = schema.precondition.substitute(&binding);
    if let Some(fail) = first_failure(&pre, state)? {
        return Ok(Err(fail.iter().map(ToString::to_string).collect()));
    }
    let eff = collect_effect(&schema.effect.substitute(&binding), state)?;
    Ok(Ok(eff))
}

/// Applies one action. On a precondition failure the state is untouched
/// and the violation names the first failed atom in formula order.
pub fn simulate_step(
    state: &WorldState,
    action: &GroundedAction,
    domain: &Domain,
    catalog: &ActionCatalog,
) -> Result<Result<WorldState, Violation>, StructuralError> {
    match check_step(state, action, domain, catalog)? {
        Ok(eff) => {
            let mut next = state.clone();
            next.apply(&eff);
            Ok(Ok(next))
        }
        Err(failed) => Ok(Err(Violation {
            step: 0,
            action: catalog.canonical(action),
            phase: Phase::Precondition,
            failed,
        })),
    }
}

/// Simulates the plan step by step; steps after the first violation are
/// not simulated. Actions outside the catalog count as violations here.
pub fn verify_plan(plan: &[GroundedAction], state0: &WorldState, domain: &Domain, catalog: &ActionCatalog) -> ValidationReport {
    let mut state = state0.clone();
    for (i, a) in plan.iter().enumerate() {
        let violation = match simulate_step(&state, a, domain, catalog) {
            Ok(Ok(next)) => {
                state = next;
                continue;
            }
            Ok(Err(mut v)) => {
                v.step = i;
                v
            }
            Err(e) => Violation {
                step: i,
                action: catalog.canonical(a),
                phase: Phase::Precondition,
                failed: vec![e.to_string()],
            },
        };
        return ValidationReport {
            valid: false,
            verified_steps: i,
            plan_length: plan.len(),
            violation: Some(violation),
            final_state: state,
        };
    }
    ValidationReport {
        valid: true,
        verified_steps: plan.len(),
        plan_length: plan.len(),
        violation: None,
        final_state: state,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub matched: Vec<Triple>,
    pub missing: Vec<Triple>,
    pub unexpected: Vec<Triple>,
    /// Observed triples outside the state/location predicates, logged only.
    pub ignored: Vec<Triple>,
}

impl AlignmentReport {
    pub fn failure(&self) -> bool {
        !self.missing.is_empty() || !self.unexpected.is_empty()
    }
}

/// Single-valued slot a dynamic triple occupies: locations share one slot.
fn slot(t: &Triple) -> (String, &'static str) {
    let kind = if kg::is_location_predicate(&t.predicate) {
        "location"
    } else if t.predicate == kg::STATE {
        "state"
    } else {
        "at"
    };
    (t.subject.clone(), kind)
}

/// Compares the expected ideal-world state with observed scene-graph
/// triples. Missing: expected dynamic atoms not observed. Unexpected:
/// observed atoms whose slot the expected state fills with another value.
pub fn align_states(expected: &WorldState, observed: &[Triple]) -> AlignmentReport {
    let exp: BTreeSet<Triple> = expected.observe().into_iter().collect();
    let mut obs = BTreeSet::new();
    let mut ignored = Vec::new();
    for t in observed {
        if kg::is_dynamic_predicate(&t.predicate) {
            obs.insert(t.clone());
        } else {
            ignored.push(t.clone());
        }
    }
    let exp_slots: BTreeMap<(String, &str), &Triple> = exp.iter().map(|t| (slot(t), t)).collect();
    let mut report = AlignmentReport {
        ignored,
        ..Default::default()
    };
    for t in &exp {
        if obs.contains(t) {
            report.matched.push(t.clone());
        } else {
            report.missing.push(t.clone());
        }
    }
    for t in &obs {
        if exp.contains(t) {
            continue;
        }
        if exp_slots.get(&slot(t)).is_some_and(|e| *e != t) {
            report.unexpected.push(t.clone());
        }
    }
    report
}

/// Atoms changed between two states (symmetric difference).
pub fn state_diff(a: &WorldState, b: &WorldState) -> BTreeSet<Atom> {
    let sa: BTreeSet<&Atom> = a.atoms().collect();
    let sb: BTreeSet<&Atom> = b.atoms().collect();
    sa.symmetric_difference(&sb).map(|x| (*x).clone()).collect()
}
