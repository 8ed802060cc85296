//! Symbolic environment simulator: the transition function over the domain
//! semantics, with seeded fault injection and scene-graph observations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kg::Triple;
use crate::pddl::{ActionCatalog, Domain, GroundedAction};
use crate::validator::{align_states, check_step, simulate_step, AlignmentReport, StructuralError};
use crate::world::{Atom, GroundEffect, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    /// Preconditions hold and the action reports success, but one effect
    /// atom silently does not happen.
    DropEffect,
    /// The environment refuses the action; the state is unchanged.
    RejectAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedFault {
    /// 0-based index of the executed step.
    pub step: usize,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultConfig {
    /// Per-action probability of a spontaneous fault.
    pub probability: f64,
    /// Extra probability added per executed step (length scaling); 0 = off.
    pub per_step_increment: f64,
    pub forced: Vec<ForcedFault>,
}

impl FaultConfig {
    pub fn none() -> Self {
        FaultConfig::default()
    }

    /// Parses `p=0.003,drop@4,reject@7,inc=0.0001`.
    pub fn parse(spec: &str) -> Result<FaultConfig, String> {
        let mut cfg = FaultConfig::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some(v) = part.strip_prefix("p=") {
                cfg.probability = v.parse().map_err(|_| format!("bad probability `{v}`"))?;
            } else if let Some(v) = part.strip_prefix("inc=") {
                cfg.per_step_increment = v.parse().map_err(|_| format!("bad increment `{v}`"))?;
            } else if let Some((kind, step)) = part.split_once('@') {
                let kind = match kind {
                    "drop" => FaultKind::DropEffect,
                    "reject" => FaultKind::RejectAction,
                    _ => return Err(format!("unknown fault kind `{kind}`")),
                };
                let step = step.parse().map_err(|_| format!("bad step `{step}`"))?;
                cfg.forced.push(ForcedFault { step, kind });
            } else {
                return Err(format!("unrecognized fault spec `{part}`"));
            }
        }
        if !(0.0..=1.0).contains(&cfg.probability) {
            return Err("probability must be within [0, 1]".into());
        }
        Ok(cfg)
    }

    pub fn is_zero(&self) -> bool {
        self.probability == 0.0 && self.per_step_increment == 0.0 && self.forced.is_empty()
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub success: bool,
    #[serde(skip)]
    pub state: WorldState,
    /// Full scene graph after the step.
    pub observed: Vec<Triple>,
    /// Dynamic triples that changed value (new values only).
    pub changed: Vec<Triple>,
    pub auditory: Option<String>,
    pub fault: Option<FaultKind>,
}

/// Fixed sound tag per action.
pub fn auditory_label(action: &str) -> Option<&'static str> {
    Some(match action {
        "toggle_on" => "appliance-hum",
        "toggle_off" => "click",
        "crack_obj" => "crack",
        "slice_obj" => "chop",
        "open_obj" => "door-open",
        "close_obj" => "door-close",
        "pour" => "pouring",
        "put_on" | "put_in" => "thud",
        _ => return None,
    })
}

/// One simulator instance per run.
pub struct Simulator<'a> {
    domain: &'a Domain,
    catalog: &'a ActionCatalog,
    state: WorldState,
    faults: FaultConfig,
    rng: ChaCha8Rng,
    steps: usize,
}

impl<'a> Simulator<'a> {
    pub fn new(domain: &'a Domain, catalog: &'a ActionCatalog, state: WorldState, faults: FaultConfig, seed: u64) -> Self {
        Simulator {
            domain,
            catalog,
            state,
            faults,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
        }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Scene graph of the current state: every state and location atom.
    pub fn observe(&self) -> Vec<Triple> {
        self.state.observe()
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    fn draw_fault(&mut self, index: usize) -> Option<FaultKind> {
        // Always consume the same number of draws per step so that fault
        // realizations depend only on the seed and the step index.
        let roll: f64 = self.rng.gen();
        let kind_roll: bool = self.rng.gen();
        if let Some(f) = self.faults.forced.iter().find(|f| f.step == index) {
            return Some(f.kind);
        }
        let p = (self.faults.probability + self.faults.per_step_increment * index as f64).min(1.0);
        (roll < p).then_some(if kind_roll { FaultKind::DropEffect } else { FaultKind::RejectAction })
    }

    /// Executes one action: T(s, a) = s'.
    pub fn step(&mut self, action: &GroundedAction) -> Result<Outcome, StructuralError> {
        let index = self.steps;
        self.steps += 1;
        let fault = self.draw_fault(index);
        let checked = check_step(&self.state, action, self.domain, self.catalog)?;
        let auditory = auditory_label(&action.name).map(str::to_string);
        let eff = match checked {
            Ok(eff) => eff,
            Err(_) => return Ok(self.unchanged(false, None, None)),
        };
        match fault {
            Some(FaultKind::RejectAction) => Ok(self.unchanged(false, None, fault)),
            Some(FaultKind::DropEffect) => {
                let drop_pick: u64 = self.rng.gen();
                let next = drop_one_effect(&self.state, &eff, drop_pick);
                Ok(self.advance(next, auditory, fault))
            }
            None => {
                let mut next = self.state.clone();
                next.apply(&eff);
                Ok(self.advance(next, auditory, None))
            }
        }
    }

    fn unchanged(&self, success: bool, auditory: Option<String>, fault: Option<FaultKind>) -> Outcome {
        Outcome {
            success,
            state: self.state.clone(),
            observed: self.observe(),
            changed: Vec::new(),
            auditory,
            fault,
        }
    }

    fn advance(&mut self, next: WorldState, auditory: Option<String>, fault: Option<FaultKind>) -> Outcome {
        let before = self.state.dynamic_atoms();
        self.state = next;
        let changed = self
            .state
            .dynamic_atoms()
            .difference(&before)
            .filter_map(Atom::to_triple)
            .collect();
        Outcome {
            success: true,
            state: self.state.clone(),
            observed: self.observe(),
            changed,
            auditory,
            fault,
        }
    }
}

/// One executed step checked against the ideal-world expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitoredStep {
    /// The validator's successor of the belief state, when the action is
    /// applicable there.
    pub expected: Option<WorldState>,
    pub outcome: Outcome,
    pub alignment: AlignmentReport,
    /// The environment reported success and the observed scene graph
    /// agrees with the expectation.
    pub success: bool,
}

/// Summary of executing a plan until its first failed step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionSummary {
    /// Steps that completed before the first failure.
    pub executed: usize,
    /// Index of the failed step, if any.
    pub failed_at: Option<usize>,
    pub steps: Vec<MonitoredStep>,
}

impl Simulator<'_> {
    /// Executes `action` and compares the observation with the validator's
    /// prediction from `belief`.
    pub fn monitored_step(&mut self, belief: &WorldState, action: &GroundedAction) -> Result<MonitoredStep, StructuralError> {
        let expected = simulate_step(belief, action, self.domain, self.catalog)?.ok();
        let outcome = self.step(action)?;
        let alignment = match &expected {
            Some(exp) => align_states(exp, &outcome.observed),
            None => AlignmentReport::default(),
        };
        let success = outcome.success && expected.is_some() && !alignment.failure();
        Ok(MonitoredStep {
            expected,
            outcome,
            alignment,
            success,
        })
    }

    /// Runs `plan` from the simulator's current state and stops at the
    /// first step that fails or diverges from the expectation.
    pub fn execute_plan(&mut self, plan: &[GroundedAction]) -> Result<ExecutionSummary, StructuralError> {
        let mut belief = self.state.clone();
        let mut steps = Vec::with_capacity(plan.len());
        for (i, a) in plan.iter().enumerate() {
            let step = self.monitored_step(&belief, a)?;
            let ok = step.success;
            if ok {
                belief = step.expected.clone().expect("successful steps have an expectation");
            }
            steps.push(step);
            if !ok {
                return Ok(ExecutionSummary {
                    executed: i,
                    failed_at: Some(i),
                    steps,
                });
            }
        }
        Ok(ExecutionSummary {
            executed: plan.len(),
            failed_at: None,
            steps,
        })
    }
}

/// Applies `eff` with one atom omitted, chosen among the atoms whose
/// omission actually changes the resulting state.
fn drop_one_effect(state: &WorldState, eff: &GroundEffect, pick: u64) -> WorldState {
    let mut full = state.clone();
    full.apply(eff);
    let mut candidates = Vec::new();
    let lists = [&eff.dels, &eff.adds, &eff.cond_dels, &eff.cond_adds];
    for (li, list) in lists.iter().enumerate() {
        for ai in 0..list.len() {
            let mut reduced = eff.clone();
            let target: &mut Vec<Atom> = match li {
                0 => &mut reduced.dels,
                1 => &mut reduced.adds,
                2 => &mut reduced.cond_dels,
                _ => &mut reduced.cond_adds,
            };
            target.remove(ai);
            let mut s = state.clone();
            s.apply(&reduced);
            if s != full {
                candidates.push(s);
            }
        }
    }
    if candidates.is_empty() {
        return full;
    }
    let i = (pick % candidates.len() as u64) as usize;
    candidates.swap_remove(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fault_specs() {
        let f = FaultConfig::parse("p=0.003,drop@4,reject@7").unwrap();
        assert_eq!(f.probability, 0.003);
        assert_eq!(f.forced.len(), 2);
        assert_eq!(f.forced[1], ForcedFault { step: 7, kind: FaultKind::RejectAction });
        assert!(FaultConfig::parse("p=2").is_err());
        assert!(FaultConfig::parse("melt@3").is_err());
        assert!(FaultConfig::parse("").unwrap().is_zero());
    }
}
