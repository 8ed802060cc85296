//! The simulator against the validator: shared semantics without faults,
//! fault realization and detection, and scene-graph observations.

mod common;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use common::reference::{random_plan, random_state};
use nsplan_core::envsim::{FaultConfig, FaultKind, ForcedFault, Simulator};
use nsplan_core::kg::{self, Pattern, Triple};
use nsplan_core::tasks;
use nsplan_core::validator::{align_states, simulate_step};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forced(step: usize, kind: FaultKind) -> FaultConfig {
    FaultConfig {
        forced: vec![ForcedFault { step, kind }],
        ..FaultConfig::none()
    }
}

#[test]
fn fault_free_steps_agree_with_the_validator() {
    let k = common::kitchen();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let s0 = random_state(&mut rng, &k.state0);
        let plan = random_plan(&mut rng, &s0, &k.catalog, 6);
        let mut sim = Simulator::new(&k.domain, &k.catalog, s0.clone(), FaultConfig::none(), 1);
        let mut ideal = s0;
        for a in &plan {
            let out = sim.step(a).unwrap();
            match simulate_step(&ideal, a, &k.domain, &k.catalog).unwrap() {
                Ok(next) => {
                    assert!(out.success);
                    assert_eq!(&out.state, &next);
                    assert!(!align_states(&next, &out.observed).failure());
                    ideal = next;
                }
                Err(_) => {
                    assert!(!out.success);
                    assert_eq!(out.state, ideal);
                }
            }
        }
    }
}

#[test]
fn ground_truth_plans_execute_without_faults() {
    let k = common::kitchen();
    for task in tasks::registry() {
        for gt in &task.ground_truths {
            let mut sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), FaultConfig::none(), 0);
            let run = sim.execute_plan(&gt.steps).unwrap();
            assert_eq!((run.executed, run.failed_at), (gt.steps.len(), None), "{}", task.id);
            assert!(run.steps.iter().all(|s| s.alignment.missing.is_empty() && s.alignment.unexpected.is_empty()));
        }
    }
}

#[test]
fn forced_faults_are_detected_at_their_step() {
    let k = common::kitchen();
    let gt = &tasks::find("T3").unwrap().primary_gt().steps.clone();
    let mut sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), forced(4, FaultKind::DropEffect), 0);
    let run = sim.execute_plan(gt).unwrap();
    assert_eq!(run.failed_at, Some(4));
    let last = run.steps.last().unwrap();
    assert_eq!(last.outcome.fault, Some(FaultKind::DropEffect));
    // The environment claims success; only the scene graph reveals the fault.
    assert!(last.outcome.success);
    assert!(!last.alignment.missing.is_empty() || !last.alignment.unexpected.is_empty());
    assert!(run.steps[..4].iter().all(|s| s.success && s.outcome.fault.is_none()));

    for step in 0..gt.len() {
        for kind in [FaultKind::DropEffect, FaultKind::RejectAction] {
            let mut sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), forced(step, kind), 0);
            let run = sim.execute_plan(gt).unwrap();
            assert_eq!(run.failed_at, Some(step), "{kind:?}@{step}");
            assert_eq!(run.executed, step);
        }
    }
}

#[test]
fn rejected_actions_leave_the_state_alone() {
    let k = common::kitchen();
    let gt = &tasks::find("T1").unwrap().primary_gt().steps.clone();
    let mut sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), forced(0, FaultKind::RejectAction), 0);
    let out = sim.step(&gt[0]).unwrap();
    assert!(!out.success);
    assert_eq!(out.state, k.state0);
    assert!(out.changed.is_empty());
}

#[test]
fn same_seed_same_outcomes() {
    let k = common::kitchen();
    let gt = &tasks::find("T10").unwrap().primary_gt().steps.clone();
    let faults = FaultConfig::parse("p=0.2").unwrap();
    let run = |seed| {
        let mut sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), faults.clone(), seed);
        gt.iter().map(|a| sim.step(a).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run(42), run(42));
    let differs = (0..20).any(|s| run(s) != run(42));
    assert!(differs, "a 20% fault rate should vary across seeds");
    // Without faults the seed is irrelevant.
    let clean = |seed| {
        let mut sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), FaultConfig::none(), seed);
        gt.iter().map(|a| sim.step(a).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(clean(1), clean(2));
}

#[test]
fn fresh_scene_graph_is_the_initial_graph_state() {
    let k = common::kitchen();
    let sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), FaultConfig::none(), 0);
    let mut observed = sim.observe();
    observed.sort();
    let mut expected: Vec<Triple> = kg::DYNAMIC_PREDICATES
        .iter()
        .flat_map(|p| k.kg.query(&Pattern::parse("*", p, "*")))
        .collect();
    expected.sort();
    assert_eq!(observed, expected);
}

#[test]
fn observation_is_read_only() {
    let k = common::kitchen();
    let sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), FaultConfig::none(), 0);
    let hash = |s: &Simulator| {
        let mut h = DefaultHasher::new();
        s.state().hash(&mut h);
        h.finish()
    };
    let before = hash(&sim);
    for _ in 0..3 {
        sim.observe();
    }
    assert_eq!(hash(&sim), before);
}

#[test]
fn putting_the_cup_in_the_microwave_is_observed() {
    let k = common::kitchen();
    let plan = common::acts(&[
        "navigate_to_obj(Cup-1)",
        "pick_up(Cup-1)",
        "navigate_to_obj(Microwave-1)",
        "open_obj(Microwave-1)",
        "put_in(Cup-1,Microwave-1)",
    ]);
    let mut sim = Simulator::new(&k.domain, &k.catalog, k.state0.clone(), FaultConfig::none(), 0);
    let run = sim.execute_plan(&plan).unwrap();
    assert_eq!(run.failed_at, None);
    let observed = sim.observe();
    assert!(observed.contains(&Triple::new("cup-1", "inside", "microwave-1")));
    assert!(!observed.iter().any(|t| t.subject == "cup-1" && t.predicate == "held_by"));
    assert_eq!(run.steps[4].outcome.auditory.as_deref(), Some("thud"));
}
