//! Adversarial fixers for the block-correction loop, run over a tiny scene
//! so that thousands of episodes stay fast.

#![allow(dead_code)]

use nsplan_core::kg::KnowledgeGraph;
use nsplan_core::pddl::{ground_catalog, parse_domain, GroundedAction};
use nsplan_core::planner::correction::{correct_aa_block, BlockCorrection, BlockRequest, CorrectionLimits};
use nsplan_core::planner::policy::{FnPolicy, PolicyError, PolicyRequest};
use nsplan_core::planner::Grounding;
use nsplan_core::similarity::SimilarityProvider;
use nsplan_core::world::WorldState;
use nsplan_core::KITCHEN_DOMAIN;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TINY: &str = "PhysicalObject subclass_of Thing
Pickupable subclass_of PhysicalObject
Receptacle subclass_of PhysicalObject
Toggleable subclass_of PhysicalObject
Apple subclass_of Pickupable
Table subclass_of Receptacle
Lamp subclass_of Toggleable
Floor subclass_of PhysicalObject
apple-1 type Apple
table-1 type Table
lamp-1 type Lamp
floor-1 type Floor
agent at floor-1
apple-1 on_top_of table-1
lamp-1 state off
";

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct EpisodeStats {
    pub episodes: usize,
    pub violations: usize,
    pub attempts: usize,
    pub max_block_len: usize,
    pub exhausted: usize,
    pub repaired: usize,
}

/// Runs `n` seeded episodes. Each starts from a random block of 1..=60
/// catalog actions and faces one of four fixers: silent (empty answers),
/// ever-growing answers, random answers of up to 80 lines, or short random
/// answers. A violation is an attempt beyond `2 * x` for the block length
/// x at that moment, or a block longer than 50.
pub fn run_episodes(n: usize, seed: u64) -> EpisodeStats {
    let kg = KnowledgeGraph::load_ontology(TINY).unwrap();
    let domain = parse_domain(KITCHEN_DOMAIN).unwrap();
    let catalog = ground_catalog(&domain, &kg);
    let sim = SimilarityProvider::Trigram;
    let g = Grounding { domain: &domain, catalog: &catalog, sim: &sim };
    let s0 = WorldState::from_kg(&kg);
    let all: Vec<GroundedAction> = catalog.actions().cloned().collect();
    let canon: Vec<String> = all.iter().map(|a| catalog.canonical(a)).collect();
    let limits = CorrectionLimits::default();
    let req = BlockRequest {
        task_id: "tiny",
        macro_index: Some(0),
        subtask: "Turn the lamp off",
        history: "(none)\n",
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = EpisodeStats::default();
    for _ in 0..n {
        let len = rng.gen_range(1..=60);
        let block: Vec<GroundedAction> = (0..len).map(|_| all[rng.gen_range(0..all.len())].clone()).collect();
        let style = match rng.gen_range(0..10) {
            0..=2 => 0,
            3 => 1,
            4..=6 => 2,
            _ => 3,
        };
        let mut grow = rng.gen_range(1..4);
        let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
        let mut policy = FnPolicy(|_: &PolicyRequest| -> Result<String, PolicyError> {
            let k = match style {
                0 => 0,
                1 => {
                    grow = (grow + 1).min(64);
                    grow
                }
                2 => local.gen_range(0..80),
                _ => local.gen_range(1..4),
            };
            let lines: Vec<&str> = (0..k).map(|_| canon[local.gen_range(0..canon.len())].as_str()).collect();
            Ok(lines.join("\n"))
        });
        let out = correct_aa_block(block, &s0, &g, &mut policy, &req, &limits).unwrap();
        let bad = out
            .attempts
            .iter()
            .any(|a| a.attempt > limits.attempt_multiplier * a.block_len || a.block_len > limits.max_block_len);
        stats.episodes += 1;
        stats.violations += usize::from(bad || out.block.len() > limits.max_block_len);
        stats.attempts += out.attempts.len();
        stats.max_block_len = stats.max_block_len.max(out.block.len());
        stats.exhausted += usize::from(out.exhausted);
        stats.repaired += usize::from(out.valid);
    }
    stats
}

/// A five-step block failing at its first step, answered every time with a
/// six-step block that still fails: the per-step budget grows from 10 to
/// 12 as the block grows.
pub fn growing_budget_run() -> BlockCorrection {
    let kg = KnowledgeGraph::load_ontology(TINY).unwrap();
    let domain = parse_domain(KITCHEN_DOMAIN).unwrap();
    let catalog = ground_catalog(&domain, &kg);
    let sim = SimilarityProvider::Trigram;
    let g = Grounding { domain: &domain, catalog: &catalog, sim: &sim };
    let s0 = WorldState::from_kg(&kg);
    let nav = "navigate_to_obj(Table-1)";
    // The lamp is already off.
    let block: Vec<GroundedAction> = ["toggle_off(Lamp-1)", nav, nav, nav, nav]
        .iter()
        .map(|l| GroundedAction::parse(l).unwrap())
        .collect();
    let six = ["navigate_to_obj(Lamp-1)", "toggle_off(Lamp-1)", nav, nav, nav, nav].join("\n");
    let mut p = FnPolicy(|_: &PolicyRequest| Ok(six.clone()));
    let req = BlockRequest {
        task_id: "tiny",
        macro_index: Some(0),
        subtask: "Turn the lamp off",
        history: "(none)\n",
    };
    correct_aa_block(block, &s0, &g, &mut p, &req, &CorrectionLimits::default()).unwrap()
}
