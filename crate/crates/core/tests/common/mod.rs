#![allow(dead_code)]

pub mod adversary;
pub mod metric_oracles;
pub mod reference;

use nsplan_core::kg::KnowledgeGraph;
use nsplan_core::pddl::{ground_catalog, parse_domain, ActionCatalog, Domain, GroundedAction};
use nsplan_core::world::WorldState;
use nsplan_core::{KITCHEN_DOMAIN, KITCHEN_TRIPLES};

pub struct Kitchen {
    pub kg: KnowledgeGraph,
    pub domain: Domain,
    pub catalog: ActionCatalog,
    pub state0: WorldState,
}

pub fn kitchen() -> Kitchen {
    let kg = KnowledgeGraph::load_ontology(KITCHEN_TRIPLES).unwrap();
    let domain = parse_domain(KITCHEN_DOMAIN).unwrap();
    let catalog = ground_catalog(&domain, &kg);
    let state0 = WorldState::from_kg(&kg);
    Kitchen { kg, domain, catalog, state0 }
}

pub fn acts(lines: &[&str]) -> Vec<GroundedAction> {
    lines.iter().map(|l| GroundedAction::parse(l).unwrap()).collect()
}
