//! Rule-based stand-in policy derived from a task's ground-truth plan.
//!
//! The primary ground truth is cut into subtasks; descriptions, conditions
//! and blocks are generated from it. Configurable flaws make the first
//! answers imperfect in the ways that the symbolic corrections target, so
//! every method configuration exercises its own code paths; correction
//! requests are answered with the clean version.

use std::fmt::Write as _;

use super::heuristic::NAVIGATE;
use super::policy::{Policy, PolicyError, PolicyRequest, RequestKind};
use crate::kg;
use crate::pddl::{ActionCatalog, Domain, Formula, GroundedAction};
use crate::tasks::TaskSpec;
use crate::validator::check_step;
use crate::world::{Atom, WorldState, REACHABLE};

/// Imperfections of first-draft answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptFlaws {
    /// Expansions leave out navigation steps that the following action
    /// needs.
    pub omit_navigation: bool,
    /// Expansions leave out `toggle_off` of an openable appliance when a
    /// later step of the same subtask depends on it.
    pub omit_toggle_off: bool,
    /// Generated preconditions keep the `reachable` requirement, which is
    /// false before the subtask's own navigation.
    pub reachable_in_pre: bool,
}

impl ScriptFlaws {
    pub fn all() -> Self {
        ScriptFlaws {
            omit_navigation: true,
            omit_toggle_off: true,
            reachable_in_pre: true,
        }
    }

    pub fn none() -> Self {
        ScriptFlaws {
            omit_navigation: false,
            omit_toggle_off: false,
            reachable_in_pre: false,
        }
    }
}

/// One subtask cut from the ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub description: String,
    pub actions: Vec<GroundedAction>,
    pub flawed_actions: Vec<GroundedAction>,
    pub pre: String,
    pub flawed_pre: String,
    pub post: String,
}

fn phrase(instance: &str, catalog: &ActionCatalog) -> String {
    let display = catalog.display_name(instance);
    let (class, idx) = display.rsplit_once('-').unwrap_or((&display, "1"));
    let base = match class {
        "WineBottle" => "bottle of wine".to_string(),
        "CounterTop" => "countertop".to_string(),
        "DiningTable" => "dining table".to_string(),
        _ => kg::class_tokens(class).join(" "),
    };
    if idx == "1" {
        format!("the {base}")
    } else {
        format!("the {base} {idx}")
    }
}

fn describe_action(a: &GroundedAction, catalog: &ActionCatalog) -> String {
    let p = |i: usize| phrase(&a.args[i], catalog);
    match (a.name.as_str(), a.args.len()) {
        ("pick_up", 1) => format!("pick up {}", p(0)),
        ("put_on", 2) => format!("put {} on {}", p(0), p(1)),
        ("put_in", 2) => format!("put {} in {}", p(0), p(1)),
        ("pour", 2) if catalog.display_name(&a.args[0]).starts_with("WineBottle") => format!("pour wine into {}", p(1)),
        ("pour", 2) => format!("pour from {} into {}", p(0), p(1)),
        ("toggle_on", 1) => format!("turn on {}", p(0)),
        ("toggle_off", 1) => format!("turn off {}", p(0)),
        ("open_obj", 1) => format!("open {}", p(0)),
        ("close_obj", 1) => format!("close {}", p(0)),
        ("crack_obj", 1) => format!("crack {}", p(0)),
        ("slice_obj", 1) => format!("slice {}", p(0)),
        (NAVIGATE, 1) => format!("go to {}", p(0)),
        _ => catalog.canonical(a),
    }
}

fn describe_segment(actions: &[GroundedAction], catalog: &ActionCatalog) -> String {
    let parts: Vec<String> = actions
        .iter()
        .filter(|a| a.name != NAVIGATE)
        .map(|a| describe_action(a, catalog))
        .collect();
    let parts = if parts.is_empty() {
        actions.iter().map(|a| describe_action(a, catalog)).collect()
    } else {
        parts
    };
    let mut s = parts.join(", then ");
    if let Some(c) = s.get(0..1) {
        s.replace_range(0..1, &c.to_uppercase());
    }
    s
}

/// Cuts after actions that complete a manipulation. A `toggle_off` stays
/// with a following action on the same object (e.g. opening the microwave
/// it just stopped).
fn cut_points(steps: &[GroundedAction]) -> Vec<usize> {
    let mut cuts = Vec::new();
    for (i, a) in steps.iter().enumerate() {
        let ends = match a.name.as_str() {
            "pick_up" | "put_on" | "put_in" | "pour" | "close_obj" | "crack_obj" | "slice_obj" => true,
            "toggle_off" => steps.get(i + 1).is_none_or(|n| n.target() != a.target()),
            _ => false,
        };
        if ends || i + 1 == steps.len() {
            cuts.push(i + 1);
        }
    }
    cuts
}

fn without_reachable(f: &Formula) -> Formula {
    match f {
        Formula::And(v) => Formula::And(
            v.iter()
                .filter(|x| !matches!(x, Formula::Atom(a) if a.pred == REACHABLE))
                .map(without_reachable)
                .collect(),
        ),
        other => other.clone(),
    }
}

fn diff_effect(before: &WorldState, after: &WorldState) -> String {
    let b = before.dynamic_atoms();
    let a = after.dynamic_atoms();
    let mut parts: Vec<String> = b.difference(&a).map(|x: &Atom| format!("(not {x})")).collect();
    parts.extend(a.difference(&b).map(|x| x.to_string()));
    if parts.is_empty() {
        "(and)".into()
    } else {
        format!("(and {})", parts.join(" "))
    }
}

/// A navigation step the next action depends on: it targets the next
/// action's (unreachable) target. Only these are left out by the
/// navigation flaw, the way a planner forgets to walk somewhere first.
fn needed_navigation(actions: &[GroundedAction], k: usize, before: &WorldState) -> bool {
    let (Some(t), Some(next)) = (actions[k].target(), actions.get(k + 1)) else {
        return false;
    };
    next.name != NAVIGATE && next.target() == Some(t) && !before.reachable(t) && before.agent_location() != Some(t)
}

/// Splits the primary ground truth into subtasks with conditions.
pub fn segment_ground_truth(
    task: &TaskSpec,
    domain: &Domain,
    catalog: &ActionCatalog,
    state0: &WorldState,
    flaws: ScriptFlaws,
) -> Result<Vec<Segment>, PolicyError> {
    let steps = &task.primary_gt().steps;
    let mut state = state0.clone();
    let mut segments = Vec::new();
    let mut from = 0;
    for to in cut_points(steps) {
        let actions = steps[from..to].to_vec();
        let start = state.clone();
        let first = actions.iter().find(|a| a.name != NAVIGATE).unwrap_or(&actions[0]);
        let schema = domain
            .action(&first.name)
            .ok_or_else(|| PolicyError::Scripted(format!("unknown action {}", first.name)))?;
        let grounded_pre = schema.precondition.substitute(&schema.binding(&first.args));
        let mut pre_states = Vec::with_capacity(actions.len());
        for a in &actions {
            pre_states.push(state.clone());
            match check_step(&state, a, domain, catalog) {
                Ok(Ok(eff)) => state.apply(&eff),
                _ => {
                    return Err(PolicyError::Scripted(format!(
                        "ground truth of {} is not executable at {}",
                        task.id,
                        catalog.canonical(a)
                    )))
                }
            }
        }
        let mut flawed_actions = Vec::new();
        for (k, a) in actions.iter().enumerate() {
            if flaws.omit_navigation && a.name == NAVIGATE && needed_navigation(&actions, k, &pre_states[k]) {
                continue;
            }
            if flaws.omit_toggle_off
                && a.name == "toggle_off"
                && k + 1 < actions.len()
                && a.target().is_some_and(|t| start.has_type(t, "Openable"))
            {
                continue;
            }
            flawed_actions.push(a.clone());
        }
        let pre = without_reachable(&grounded_pre).to_string();
        segments.push(Segment {
            description: describe_segment(&actions, catalog),
            flawed_pre: if flaws.reachable_in_pre { grounded_pre.to_string() } else { pre.clone() },
            pre,
            post: diff_effect(&start, &state),
            flawed_actions,
            actions,
        });
        from = to;
    }
    Ok(segments)
}

/// Answers every request kind for one task.
pub struct ScriptedPolicy {
    task_id: String,
    objects: Vec<String>,
    segments: Vec<Segment>,
    rendered: Vec<(String, String)>,
    full: (String, String),
}

impl ScriptedPolicy {
    pub fn new(task: &TaskSpec, domain: &Domain, catalog: &ActionCatalog, state0: &WorldState, flaws: ScriptFlaws) -> Result<Self, PolicyError> {
        let segments = segment_ground_truth(task, domain, catalog, state0, flaws)?;
        let render = |v: &[GroundedAction]| {
            let mut s = String::new();
            for a in v {
                let _ = writeln!(s, "{}", catalog.canonical(a));
            }
            s
        };
        let rendered: Vec<(String, String)> = segments.iter().map(|s| (render(&s.actions), render(&s.flawed_actions))).collect();
        let full = (
            rendered.iter().map(|r| r.0.as_str()).collect(),
            rendered.iter().map(|r| r.1.as_str()).collect(),
        );
        Ok(ScriptedPolicy {
            task_id: task.id.clone(),
            objects: task.objects.clone(),
            segments,
            rendered,
            full,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn index(&self, req: &PolicyRequest) -> Result<usize, PolicyError> {
        match req.macro_index {
            Some(i) if i < self.segments.len() => Ok(i),
            other => Err(PolicyError::Scripted(format!("{}: no subtask {:?} for {}", self.task_id, other, req.kind))),
        }
    }

    fn conditions(&self, flawed: bool) -> String {
        let mut s = String::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let pre = if flawed { &seg.flawed_pre } else { &seg.pre };
            let _ = writeln!(s, "{} pre: {}", i + 1, pre);
            let _ = writeln!(s, "{} post: {}", i + 1, seg.post);
        }
        s
    }
}

impl Policy for ScriptedPolicy {
    fn complete(&mut self, req: &PolicyRequest) -> Result<String, PolicyError> {
        Ok(match req.kind {
            RequestKind::SelectObjects => self.objects.join("\n"),
            RequestKind::MacroPlan => {
                let mut s = String::new();
                for (i, seg) in self.segments.iter().enumerate() {
                    let _ = writeln!(s, "{}. {}", i + 1, seg.description);
                }
                s
            }
            RequestKind::MacroConditions => self.conditions(true),
            RequestKind::CorrectConditions => self.conditions(false),
            RequestKind::RefineConditions => {
                let i = self.index(req)?;
                format!("{} pre: {}\n{} post: {}\n", i + 1, self.segments[i].pre, i + 1, self.segments[i].post)
            }
            RequestKind::ExpandMacro => self.rendered[self.index(req)?].1.clone(),
            RequestKind::ExpandTask => self.full.1.clone(),
            RequestKind::CorrectBlock => match req.macro_index {
                None => self.full.0.clone(),
                Some(_) => self.rendered[self.index(req)?].0.clone(),
            },
        })
    }
}
