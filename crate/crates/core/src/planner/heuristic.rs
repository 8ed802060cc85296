//! Rule-based correction: inserts missing navigation steps.

use crate::pddl::{collect_effect, ActionCatalog, Domain, GroundedAction};
use crate::world::WorldState;

pub const NAVIGATE: &str = "navigate_to_obj";

/// Applies an action's effects without checking its preconditions. Actions
/// without a schema or with ill-formed effects leave the state unchanged.
pub fn apply_unchecked(state: &mut WorldState, action: &GroundedAction, domain: &Domain) {
    let Some(schema) = domain.action(&action.name) else {
        return;
    };
    if schema.arity() != action.args.len() {
        return;
    }
    let eff = schema.effect.substitute(&schema.binding(&action.args));
    if let Ok(g) = collect_effect(&eff, state) {
        state.apply(&g);
    }
}

/// Inserts `navigate_to_obj(target)` before every action whose target is
/// neither reachable nor the agent's location in the tracked state. The
/// state is tracked by applying every action's effects, so later targets
/// are judged against the optimistic outcome of earlier steps. No other
/// edits are made, and the pass is idempotent.
pub fn heuristic_correct(seq: &[GroundedAction], state0: &WorldState, domain: &Domain, catalog: &ActionCatalog) -> Vec<GroundedAction> {
    let mut state = state0.clone();
    let mut out = Vec::with_capacity(seq.len());
    for a in seq {
        if a.name != NAVIGATE {
            if let Some(t) = a.target() {
                let nav = GroundedAction::new(NAVIGATE, [t]);
                if !state.reachable(t) && state.agent_location() != Some(t) && catalog.contains(&nav) {
                    apply_unchecked(&mut state, &nav, domain);
                    out.push(nav);
                }
            }
        }
        apply_unchecked(&mut state, a, domain);
        out.push(a.clone());
    }
    out
}
