use nsplan_core::kg::KnowledgeGraph;
use nsplan_core::pddl::{ground_catalog, parse_domain};
use nsplan_core::tasks::registry;
use nsplan_core::validator::verify_plan;
use nsplan_core::world::WorldState;
use nsplan_core::{KITCHEN_DOMAIN, KITCHEN_TRIPLES};

#[test]
fn every_ground_truth_plan_validates() {
    let kg = KnowledgeGraph::load_ontology(KITCHEN_TRIPLES).unwrap();
    let domain = parse_domain(KITCHEN_DOMAIN).unwrap();
    let catalog = ground_catalog(&domain, &kg);
    let s0 = WorldState::from_kg(&kg);
    for t in registry() {
        for (i, gt) in t.ground_truths.iter().enumerate() {
            let r = verify_plan(&gt.steps, &s0, &domain, &catalog);
            assert!(r.valid, "{} gt#{i}: {:?}", t.id, r.violation);
            println!("{} gt#{i} steps={} table={}", t.id, gt.steps.len(), t.table_steps);
        }
        assert_eq!(t.objects.len(), match t.id.as_str() {
            "T1" | "T2" | "T3" => 2, "T4" | "T5" | "T5bis" | "T6" => 3, "T7" => 4, "T8" => 5, "T9" | "T10" => 7, _ => 10,
        });
    }
}
