//! Registry of the benchmark kitchen tasks and their ground-truth plans.

use serde::{Deserialize, Serialize};

use crate::pddl::GroundedAction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Complexity {
    Moderate,
    High,
}

/// Steps of one ground-truth plan (0-based indices) that form permutable
/// contiguous segments: each inner vector is one segment, and the segments
/// of a group may appear in any order.
pub type PartialOrderGroup = Vec<Vec<usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub steps: Vec<GroundedAction>,
    pub partial_order: Vec<PartialOrderGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub name: String,
    /// Goal-oriented phrasing, consumed by default.
    pub goal_text: String,
    /// Constructive (step-describing) phrasing.
    pub constructive_text: Option<String>,
    pub complexity: Complexity,
    /// Number of steps listed for the task in the benchmark table.
    pub table_steps: usize,
    /// Object classes relevant to the task; its length is the table's
    /// object count.
    pub objects: Vec<String>,
    pub ground_truths: Vec<GroundTruth>,
}

impl TaskSpec {
    pub fn primary_gt(&self) -> &GroundTruth {
        &self.ground_truths[0]
    }
}

fn plan(lines: &[&str]) -> Vec<GroundedAction> {
    lines
        .iter()
        .map(|l| GroundedAction::parse(l).unwrap_or_else(|| panic!("bad fixture action {l}")))
        .collect()
}

/// Fixture listing style with the display-form typo of the published
/// listing normalized (`EggCracked` -> `EggCracked-1`).
pub const T3_GROUND_TRUTH: &[&str] = &[
    "(navigate_to_obj, Egg-1)",
    "(pick_up, Egg-1)",
    "(crack_obj, Egg-1)",
    "(navigate_to_obj, Pan-1)",
    "(put_in, EggCracked-1, Pan-1)",
    "(pick_up, Pan-1)",
    "(navigate_to_obj, StoveBurner-1)",
    "(put_on, Pan-1, StoveBurner-1)",
    "(toggle_on, StoveBurner-1)",
    "(toggle_off, StoveBurner-1)",
    "(pick_up, EggCracked-1)",
    "(navigate_to_obj, Plate-1)",
    "(put_on, EggCracked-1, Plate-1)",
    "(pick_up, Plate-1)",
    "(navigate_to_obj, CounterTop-1)",
    "(put_on, Plate-1, CounterTop-1)",
];

/// A longer generated alternative for the fried-egg task, with redundant
/// navigation and a detour via the countertop.
pub const T3_ALTERNATIVE: &[&str] = &[
    "(navigate_to_obj, Egg-1)",
    "(pick_up, Egg-1)",
    "(navigate_to_obj, Egg-1)",
    "(crack_obj, Egg-1)",
    "(navigate_to_obj, Pan-1)",
    "(navigate_to_obj, CounterTop-1)",
    "(put_on, EggCracked-1, CounterTop-1)",
    "(navigate_to_obj, Pan-1)",
    "(pick_up, Pan-1)",
    "(navigate_to_obj, StoveBurner-1)",
    "(put_on, Pan-1, StoveBurner-1)",
    "(navigate_to_obj, StoveBurner-1)",
    "(toggle_on, StoveBurner-1)",
    "(navigate_to_obj, EggCracked-1)",
    "(pick_up, EggCracked-1)",
    "(navigate_to_obj, Pan-1)",
    "(put_in, EggCracked-1, Pan-1)",
    "(navigate_to_obj, StoveBurner-1)",
    "(toggle_off, StoveBurner-1)",
    "(navigate_to_obj, Plate-1)",
    "(pick_up, Plate-1)",
    "(navigate_to_obj, EggCracked-1)",
    "(navigate_to_obj, CounterTop-1)",
    "(put_on, Plate-1, CounterTop-1)",
    "(navigate_to_obj, EggCracked-1)",
    "(pick_up, EggCracked-1)",
    "(navigate_to_obj, Plate-1)",
    "(put_on, EggCracked-1, Plate-1)",
    "(navigate_to_obj, Plate-1)",
    "(pick_up, Plate-1)",
    "(navigate_to_obj, CounterTop-1)",
    "(put_on, Plate-1, CounterTop-1)",
];

const T5BIS_STOVE: &[&str] = &[
    "navigate_to_obj(Pot-1)",
    "pick_up(Pot-1)",
    "navigate_to_obj(SinkBasin-1)",
    "put_in(Pot-1,SinkBasin-1)",
    "toggle_on(Faucet-1)",
    "toggle_off(Faucet-1)",
    "pick_up(Pot-1)",
    "navigate_to_obj(StoveBurner-1)",
    "put_on(Pot-1,StoveBurner-1)",
    "toggle_on(StoveKnob-1)",
    "toggle_off(StoveKnob-1)",
    "pick_up(Pot-1)",
    "navigate_to_obj(Cup-1)",
    "pour(Pot-1,Cup-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Pot-1,CounterTop-1)",
    "navigate_to_obj(Cup-1)",
    "pick_up(Cup-1)",
];

const T5BIS_MICROWAVE: &[&str] = &[
    "navigate_to_obj(Cup-1)",
    "pick_up(Cup-1)",
    "navigate_to_obj(SinkBasin-1)",
    "put_in(Cup-1,SinkBasin-1)",
    "toggle_on(Faucet-1)",
    "toggle_off(Faucet-1)",
    "navigate_to_obj(Microwave-1)",
    "open_obj(Microwave-1)",
    "navigate_to_obj(SinkBasin-1)",
    "pick_up(Cup-1)",
    "navigate_to_obj(Microwave-1)",
    "put_in(Cup-1,Microwave-1)",
    "close_obj(Microwave-1)",
    "toggle_on(Microwave-1)",
    "toggle_off(Microwave-1)",
    "open_obj(Microwave-1)",
    "pick_up(Cup-1)",
];

const T1: &[&str] = &[
    "navigate_to_obj(WineBottle-1)",
    "pick_up(WineBottle-1)",
    "navigate_to_obj(Cup-1)",
    "pour(WineBottle-1,Cup-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(WineBottle-1,CounterTop-1)",
    "navigate_to_obj(Cup-1)",
    "pick_up(Cup-1)",
];

const T2: &[&str] = &[
    "navigate_to_obj(Mug-1)",
    "pick_up(Mug-1)",
    "navigate_to_obj(CoffeeMachine-1)",
    "put_on(Mug-1,CoffeeMachine-1)",
    "toggle_on(CoffeeMachine-1)",
    "toggle_off(CoffeeMachine-1)",
    "pick_up(Mug-1)",
    "navigate_to_obj(DiningTable-1)",
    "put_on(Mug-1,DiningTable-1)",
];

const T4: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Bread-1)",
    "close_obj(Fridge-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Bread-1,CounterTop-1)",
    "slice_obj(Bread-1)",
    "pick_up(BreadSliced-1)",
    "navigate_to_obj(Toaster-1)",
    "put_in(BreadSliced-1,Toaster-1)",
    "toggle_on(Toaster-1)",
    "toggle_off(Toaster-1)",
    "pick_up(BreadSliced-1)",
    "navigate_to_obj(Plate-1)",
    "put_on(BreadSliced-1,Plate-1)",
];

const T5: &[&str] = &[
    "navigate_to_obj(Microwave-1)",
    "open_obj(Microwave-1)",
    "navigate_to_obj(Cup-1)",
    "pick_up(Cup-1)",
    "navigate_to_obj(SinkBasin-1)",
    "put_in(Cup-1,SinkBasin-1)",
    "toggle_on(Faucet-1)",
    "toggle_off(Faucet-1)",
    "pick_up(Cup-1)",
    "navigate_to_obj(Microwave-1)",
    "put_in(Cup-1,Microwave-1)",
    "close_obj(Microwave-1)",
    "toggle_on(Microwave-1)",
    "toggle_off(Microwave-1)",
    "open_obj(Microwave-1)",
    "pick_up(Cup-1)",
];

const T6: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Potato-1)",
    "close_obj(Fridge-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Potato-1,CounterTop-1)",
    "slice_obj(Potato-1)",
    "pick_up(PotatoSliced-1)",
    "navigate_to_obj(Plate-1)",
    "put_on(PotatoSliced-1,Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(Microwave-1)",
    "open_obj(Microwave-1)",
    "put_in(Plate-1,Microwave-1)",
    "close_obj(Microwave-1)",
    "toggle_on(Microwave-1)",
    "toggle_off(Microwave-1)",
    "open_obj(Microwave-1)",
    "pick_up(Plate-1)",
    "close_obj(Microwave-1)",
];

const T7: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Lettuce-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Lettuce-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Tomato-1)",
    "close_obj(Fridge-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Tomato-1,CounterTop-1)",
    "slice_obj(Lettuce-1)",
    "slice_obj(Tomato-1)",
    "navigate_to_obj(Cabinet-1)",
    "open_obj(Cabinet-1)",
    "pick_up(Bowl-1)",
    "close_obj(Cabinet-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Bowl-1,CounterTop-1)",
    "pick_up(LettuceSliced-1)",
    "put_in(LettuceSliced-1,Bowl-1)",
    "pick_up(TomatoSliced-1)",
    "put_in(TomatoSliced-1,Bowl-1)",
    "pick_up(Bowl-1)",
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "put_in(Bowl-1,Fridge-1)",
];

const T8: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Bread-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Bread-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Lettuce-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Lettuce-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Tomato-1)",
    "close_obj(Fridge-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Tomato-1,CounterTop-1)",
    "slice_obj(Bread-1)",
    "slice_obj(Lettuce-1)",
    "slice_obj(Tomato-1)",
    "navigate_to_obj(Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Plate-1,CounterTop-1)",
    "pick_up(BreadSliced-1)",
    "put_on(BreadSliced-1,Plate-1)",
    "pick_up(LettuceSliced-1)",
    "put_on(LettuceSliced-1,Plate-1)",
    "pick_up(TomatoSliced-1)",
    "put_on(TomatoSliced-1,Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(DiningTable-1)",
    "put_on(Plate-1,DiningTable-1)",
];

const T9: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Potato-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Potato-1,CounterTop-1)",
    "slice_obj(Potato-1)",
    "pick_up(Egg-1)",
    "crack_obj(Egg-1)",
    "put_in(EggCracked-1,Pan-1)",
    "pick_up(Pan-1)",
    "navigate_to_obj(StoveBurner-1)",
    "put_on(Pan-1,StoveBurner-1)",
    "toggle_on(StoveBurner-1)",
    "toggle_off(StoveBurner-1)",
    "pick_up(EggCracked-1)",
    "navigate_to_obj(Plate-1)",
    "put_on(EggCracked-1,Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "pick_up(PotatoSliced-1)",
    "navigate_to_obj(Microwave-1)",
    "open_obj(Microwave-1)",
    "put_in(PotatoSliced-1,Microwave-1)",
    "close_obj(Microwave-1)",
    "toggle_on(Microwave-1)",
    "toggle_off(Microwave-1)",
    "open_obj(Microwave-1)",
    "pick_up(PotatoSliced-1)",
    "navigate_to_obj(Plate-1)",
    "put_on(PotatoSliced-1,Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Plate-1,CounterTop-1)",
];

const T10: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Lettuce-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Lettuce-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Tomato-1)",
    "close_obj(Fridge-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Tomato-1,CounterTop-1)",
    "slice_obj(Lettuce-1)",
    "slice_obj(Tomato-1)",
    "slice_obj(Apple-1)",
    "navigate_to_obj(Cabinet-1)",
    "open_obj(Cabinet-1)",
    "pick_up(Bowl-1)",
    "close_obj(Cabinet-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Bowl-1,CounterTop-1)",
    "pick_up(LettuceSliced-1)",
    "put_in(LettuceSliced-1,Bowl-1)",
    "pick_up(TomatoSliced-1)",
    "put_in(TomatoSliced-1,Bowl-1)",
    "pick_up(AppleSliced-1)",
    "put_in(AppleSliced-1,Bowl-1)",
    "pick_up(Egg-1)",
    "crack_obj(Egg-1)",
    "put_in(EggCracked-1,Bowl-1)",
    "pick_up(Bowl-1)",
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "put_in(Bowl-1,Fridge-1)",
    "close_obj(Fridge-1)",
];

const T11: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Bread-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Bread-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Tomato-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Tomato-1,CounterTop-1)",
    "slice_obj(Bread-1)",
    "slice_obj(Tomato-1)",
    "pick_up(BreadSliced-1)",
    "navigate_to_obj(Toaster-1)",
    "put_in(BreadSliced-1,Toaster-1)",
    "toggle_on(Toaster-1)",
    "toggle_off(Toaster-1)",
    "pick_up(BreadSliced-1)",
    "navigate_to_obj(Plate-1)",
    "put_on(BreadSliced-1,Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "pick_up(Egg-1)",
    "crack_obj(Egg-1)",
    "put_in(EggCracked-1,Pan-1)",
    "pick_up(Pan-1)",
    "navigate_to_obj(StoveBurner-1)",
    "put_on(Pan-1,StoveBurner-1)",
    "toggle_on(StoveBurner-1)",
    "toggle_off(StoveBurner-1)",
    "pick_up(EggCracked-1)",
    "navigate_to_obj(Plate-1)",
    "put_on(EggCracked-1,Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "pick_up(TomatoSliced-1)",
    "navigate_to_obj(Plate-1)",
    "put_on(TomatoSliced-1,Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Plate-1,CounterTop-1)",
];

/// Sandwich with apple slices, served with a coffee.
const T12_COFFEE: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Bread-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Bread-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Lettuce-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Lettuce-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Tomato-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Tomato-1,CounterTop-1)",
    "slice_obj(Bread-1)",
    "slice_obj(Lettuce-1)",
    "slice_obj(Tomato-1)",
    "slice_obj(Apple-1)",
    "navigate_to_obj(Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Plate-1,CounterTop-1)",
    "pick_up(BreadSliced-1)",
    "put_on(BreadSliced-1,Plate-1)",
    "pick_up(LettuceSliced-1)",
    "put_on(LettuceSliced-1,Plate-1)",
    "pick_up(TomatoSliced-1)",
    "put_on(TomatoSliced-1,Plate-1)",
    "pick_up(AppleSliced-1)",
    "put_on(AppleSliced-1,Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(DiningTable-1)",
    "put_on(Plate-1,DiningTable-1)",
    "navigate_to_obj(Mug-1)",
    "pick_up(Mug-1)",
    "navigate_to_obj(CoffeeMachine-1)",
    "put_on(Mug-1,CoffeeMachine-1)",
    "toggle_on(CoffeeMachine-1)",
    "toggle_off(CoffeeMachine-1)",
    "pick_up(Mug-1)",
    "navigate_to_obj(DiningTable-1)",
    "put_on(Mug-1,DiningTable-1)",
];

/// Sandwich with apple slices, served with a glass of wine.
const T12_WINE: &[&str] = &[
    "navigate_to_obj(Fridge-1)",
    "open_obj(Fridge-1)",
    "pick_up(Bread-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Bread-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Lettuce-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Lettuce-1,CounterTop-1)",
    "navigate_to_obj(Fridge-1)",
    "pick_up(Tomato-1)",
    "close_obj(Fridge-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Tomato-1,CounterTop-1)",
    "slice_obj(Bread-1)",
    "slice_obj(Lettuce-1)",
    "slice_obj(Tomato-1)",
    "slice_obj(Apple-1)",
    "navigate_to_obj(Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(Plate-1,CounterTop-1)",
    "pick_up(BreadSliced-1)",
    "put_on(BreadSliced-1,Plate-1)",
    "pick_up(LettuceSliced-1)",
    "put_on(LettuceSliced-1,Plate-1)",
    "pick_up(TomatoSliced-1)",
    "put_on(TomatoSliced-1,Plate-1)",
    "pick_up(AppleSliced-1)",
    "put_on(AppleSliced-1,Plate-1)",
    "pick_up(Plate-1)",
    "navigate_to_obj(DiningTable-1)",
    "put_on(Plate-1,DiningTable-1)",
    "navigate_to_obj(WineBottle-1)",
    "pick_up(WineBottle-1)",
    "navigate_to_obj(Cup-1)",
    "pour(WineBottle-1,Cup-1)",
    "navigate_to_obj(CounterTop-1)",
    "put_on(WineBottle-1,CounterTop-1)",
    "navigate_to_obj(Cup-1)",
    "pick_up(Cup-1)",
];

fn segs(groups: &[&[&[usize]]]) -> Vec<PartialOrderGroup> {
    groups.iter().map(|g| g.iter().map(|s| s.to_vec()).collect()).collect()
}

#[allow(clippy::too_many_arguments)]
fn task(
    id: &str,
    name: &str,
    goal: &str,
    constructive: &str,
    complexity: Complexity,
    table_steps: usize,
    objects: &[&str],
    gts: Vec<(&[&str], Vec<PartialOrderGroup>)>,
) -> TaskSpec {
    TaskSpec {
        id: id.into(),
        name: name.into(),
        goal_text: goal.into(),
        constructive_text: Some(constructive.into()),
        complexity,
        table_steps,
        objects: objects.iter().map(|s| s.to_string()).collect(),
        ground_truths: gts
            .into_iter()
            .map(|(p, po)| GroundTruth { steps: plan(p), partial_order: po })
            .collect(),
    }
}

/// All thirteen benchmark tasks in registry order.
pub fn registry() -> Vec<TaskSpec> {
    use Complexity::*;
    vec![
        task("T1", "Serve wine", "I want a cup of wine served.",
            "Pick up the wine bottle, pour wine into the cup, put the bottle back on the countertop and pick up the cup.",
            Moderate, 8, &["WineBottle", "Cup"], vec![(T1, vec![])]),
        task("T2", "Make coffee", "I want a mug of coffee on the dining table.",
            "Put the mug on the coffee machine, run the machine, and bring the mug to the dining table.",
            Moderate, 9, &["Mug", "CoffeeMachine"], vec![(T2, vec![])]),
        task("T3", "Fry egg in a pan", "I want a fried egg in a plate on the countertop.",
            "Crack the egg into the pan, fry it on the stove burner, put it on the plate and put the plate on the countertop.",
            Moderate, 13, &["Egg", "Pan"], vec![(T3_GROUND_TRUTH, vec![])]),
        task("T4", "Toast bread", "I want a slice of toast on a plate.",
            "Take the bread from the fridge, slice it, toast a slice in the toaster and put it on the plate.",
            Moderate, 15, &["Bread", "Toaster", "Plate"], vec![(T4, vec![])]),
        task("T5", "Warm water (in microwave)", "I want warm water in a cup, warmed using the microwave.",
            "Fill the cup with water at the sink, heat it in the microwave and take it out.",
            Moderate, 16, &["Cup", "Faucet", "Microwave"], vec![(T5, vec![])]),
        task("T5bis", "Warm water (generic)", "I want warm water in a cup.",
            "Fill a container with water, heat it with any appliance and end up holding a cup of warm water.",
            Moderate, 16, &["Cup", "Faucet", "Microwave"], vec![(T5BIS_STOVE, vec![]), (T5BIS_MICROWAVE, vec![])]),
        task("T6", "Cook potato slice (in microwave)", "I want a cooked potato slice on a plate, cooked in the microwave.",
            "Take the potato from the fridge, slice it, put a slice on the plate and cook it in the microwave.",
            Moderate, 20, &["Potato", "Microwave", "Plate"], vec![(T6, vec![])]),
        task("T7", "Salad", "I want a lettuce and tomato salad in a bowl, kept in the fridge.",
            "Slice lettuce and tomato, put the slices in a bowl and store the bowl in the fridge.",
            High, 26, &["Lettuce", "Tomato", "Bowl", "Fridge"],
            vec![(T7, segs(&[&[&[10], &[11]], &[&[18, 19], &[20, 21]]]))]),
        task("T8", "Vegan sandwich", "I want a vegan sandwich with lettuce and tomato on a plate on the dining table.",
            "Slice bread, lettuce and tomato, stack them on a plate and put the plate on the dining table.",
            High, 30, &["Bread", "Lettuce", "Tomato", "Plate", "Fridge"],
            vec![(T8, segs(&[&[&[15], &[16]], &[&[23, 24], &[25, 26]]]))]),
        task("T9", "Cook egg and potato slice", "I want a fried egg and a cooked potato slice on a plate on the countertop.",
            "Fry the egg in the pan on the stove, cook a potato slice in the microwave, and serve both on the plate.",
            High, 32, &["Egg", "Pan", "StoveBurner", "Potato", "Microwave", "Plate", "Fridge"], vec![(T9, vec![])]),
        task("T10", "Complex salad", "I want a salad with lettuce, tomato, apple and egg in a bowl, kept in the fridge.",
            "Slice lettuce, tomato and apple, put them and a cracked egg in a bowl and store the bowl in the fridge.",
            High, 33, &["Lettuce", "Tomato", "Apple", "Egg", "Bowl", "Fridge", "Cabinet"],
            vec![(T10, segs(&[&[&[10], &[11], &[12]], &[&[19, 20], &[21, 22], &[23, 24]]]))]),
        task("T11", "Tomato-egg on toast", "I want toast topped with a fried egg and tomato slices on a plate on the countertop.",
            "Toast a bread slice, fry an egg, slice a tomato, assemble them on the plate and put it on the countertop.",
            High, 38, &["Bread", "Toaster", "Egg", "Pan", "StoveBurner", "Tomato", "Plate", "Fridge", "CounterTop", "DiningTable"],
            vec![(T11, vec![])]),
        task("T12", "Complex plate", "Set the table and serve a vegan meal.",
            "Prepare a vegan sandwich with apple slices on the dining table and serve a drink.",
            High, 41, &["Bread", "Lettuce", "Tomato", "Apple", "Plate", "Fridge", "Mug", "CoffeeMachine", "WineBottle", "Cup"],
            vec![(T12_COFFEE, vec![]), (T12_WINE, vec![])]),
    ]
}

pub fn find(id: &str) -> Option<TaskSpec> {
    registry().into_iter().find(|t| t.id.eq_ignore_ascii_case(id))
}

pub fn t3_alternative() -> Vec<GroundedAction> {
    plan(T3_ALTERNATIVE)
}
