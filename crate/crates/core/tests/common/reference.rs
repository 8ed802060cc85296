//! A deliberately naive interpreter of the kitchen domain, written from the
//! action definitions by hand over plain maps, used as an oracle for the
//! formula-driven validator. Also generates random (state, plan) instances.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nsplan_core::pddl::{ActionCatalog, GroundedAction};
use nsplan_core::world::{Atom, WorldState};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefState {
    /// object -> (relation, target), relation one of inside/on_top_of/held_by
    pub loc: BTreeMap<String, (String, String)>,
    pub state: BTreeMap<String, String>,
    pub at: Option<String>,
    pub types: BTreeSet<(String, String)>,
    pub near: BTreeSet<(String, String)>,
    pub yields: Vec<(String, String)>,
}

impl RefState {
    pub fn from_world(w: &WorldState) -> Self {
        let mut r = RefState {
            loc: BTreeMap::new(),
            state: BTreeMap::new(),
            at: None,
            types: BTreeSet::new(),
            near: BTreeSet::new(),
            yields: Vec::new(),
        };
        for a in w.atoms() {
            let (x, y) = match a.args.as_slice() {
                [x, y] => (x.clone(), y.clone()),
                _ => continue,
            };
            match a.pred.as_str() {
                "inside" | "on_top_of" | "held_by" => {
                    r.loc.insert(x, (a.pred.clone(), y));
                }
                "state" => {
                    r.state.insert(x, y);
                }
                "at" => r.at = Some(y),
                "type" => {
                    r.types.insert((x, y));
                }
                "near" => {
                    r.near.insert((x, y));
                }
                "yields" => r.yields.push((x, y)),
                _ => {}
            }
        }
        r.yields.sort();
        r
    }

    /// Location and state atoms in the validator's atom form.
    pub fn dynamic_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for (o, (rel, t)) in &self.loc {
            out.insert(Atom::binary(rel, o, t));
        }
        for (o, v) in &self.state {
            out.insert(Atom::binary("state", o, v));
        }
        if let Some(l) = &self.at {
            out.insert(Atom::binary("at", "agent", l));
        }
        out
    }

    fn is(&self, o: &str, class: &str) -> bool {
        self.types.contains(&(o.to_string(), class.to_string()))
    }

    fn st(&self, o: &str) -> Option<&str> {
        self.state.get(o).map(String::as_str)
    }

    fn held(&self, o: &str) -> bool {
        self.loc.get(o).is_some_and(|(rel, t)| rel == "held_by" && t == "agent")
    }

    fn hand_empty(&self) -> bool {
        !self.loc.values().any(|(rel, t)| rel == "held_by" && t == "agent")
    }

    fn chain(&self, o: &str) -> Vec<String> {
        let mut out = vec![o.to_string()];
        let mut cur = o.to_string();
        while let Some((rel, t)) = self.loc.get(&cur) {
            if rel == "held_by" || out.contains(t) {
                break;
            }
            out.push(t.clone());
            cur = t.clone();
        }
        out
    }

    fn reachable(&self, o: &str) -> bool {
        if matches!(self.st(o), Some("absent") | Some("consumed")) {
            return false;
        }
        if self.held(o) {
            return true;
        }
        let Some(l) = &self.at else {
            return false;
        };
        let near = |x: &String| self.near.contains(&(x.clone(), l.clone())) || self.near.contains(&(l.clone(), x.clone()));
        self.chain(o).iter().any(|x| x == l || near(x)) || self.chain(l).iter().any(|x| x == o)
    }

    /// Whether the action's precondition holds.
    pub fn applicable(&self, a: &GroundedAction) -> bool {
        let o = a.args[0].as_str();
        let r = a.args.get(1).map(String::as_str).unwrap_or("");
        match a.name.as_str() {
            "navigate_to_obj" => true,
            "pick_up" | "slice_obj" => self.hand_empty() && self.reachable(o),
            "put_on" | "pour" => self.held(o) && self.reachable(r) && !self.held(r),
            "put_in" => self.held(o) && self.reachable(r) && !self.held(r) && (!self.is(r, "Openable") || self.st(r) == Some("open")),
            "toggle_on" => self.reachable(o) && self.st(o) != Some("on") && (!self.is(o, "Openable") || self.st(o) == Some("closed")),
            "toggle_off" => self.reachable(o) && self.st(o) == Some("on"),
            "open_obj" => self.reachable(o) && self.st(o) == Some("closed"),
            "close_obj" => self.reachable(o) && self.st(o) == Some("open"),
            "crack_obj" => self.held(o),
            other => panic!("reference interpreter does not know {other}"),
        }
    }

    /// Applies the action's effect; the caller checks applicability.
    pub fn apply(&mut self, a: &GroundedAction) {
        let o = a.args[0].clone();
        let r = a.args.get(1).cloned().unwrap_or_default();
        match a.name.as_str() {
            "navigate_to_obj" => self.at = Some(o),
            "pick_up" => {
                self.loc.insert(o, ("held_by".into(), "agent".into()));
            }
            "put_on" => {
                self.loc.insert(o, ("on_top_of".into(), r));
            }
            "put_in" => {
                self.loc.insert(o, ("inside".into(), r));
            }
            "toggle_on" => {
                self.state.insert(o, "on".into());
            }
            "toggle_off" => {
                let v = if self.is(&o, "Openable") { "closed" } else { "off" };
                self.state.insert(o, v.into());
            }
            "open_obj" => {
                self.state.insert(o, "open".into());
            }
            "close_obj" => {
                self.state.insert(o, "closed".into());
            }
            "pour" => {
                self.state.insert(r, "filled".into());
            }
            "crack_obj" | "slice_obj" => {
                let products: Vec<String> = self.yields.iter().filter(|(s, _)| *s == o).map(|(_, p)| p.clone()).collect();
                let old = self.loc.remove(&o);
                for (i, p) in products.iter().enumerate() {
                    if self.st(p) == Some("absent") {
                        self.state.remove(p);
                    }
                    if let Some((rel, t)) = &old {
                        if rel != "held_by" || i == 0 {
                            self.loc.insert(p.clone(), (rel.clone(), t.clone()));
                        }
                    }
                }
                self.state.insert(o.clone(), "consumed".into());
                if self.at.as_deref() == Some(o.as_str()) {
                    if let Some(first) = products.first() {
                        self.at = Some(first.clone());
                    }
                }
            }
            other => panic!("reference interpreter does not know {other}"),
        }
    }
}

/// Verdict of the reference interpreter: the index of the first
/// inapplicable step, or `None` when the plan runs through, plus the state
/// reached.
pub fn reference_run(plan: &[GroundedAction], state0: &WorldState) -> (Option<usize>, RefState) {
    let mut s = RefState::from_world(state0);
    for (i, a) in plan.iter().enumerate() {
        if !s.applicable(a) {
            return (Some(i), s);
        }
        s.apply(a);
    }
    (None, s)
}

/// A random state reachable by rearranging the initial scene: the agent
/// stands somewhere, objects sit on or in random receptacles or in the
/// hand, and appliances have random states.
pub fn random_state<R: Rng>(rng: &mut R, state0: &WorldState) -> WorldState {
    let mut w = state0.clone();
    let objects: Vec<String> = state0
        .atoms()
        .filter(|a| a.pred == "type" && a.args[1] == "PhysicalObject")
        .map(|a| a.args[0].clone())
        .collect();
    let receptacles: Vec<String> = state0
        .atoms()
        .filter(|a| a.pred == "type" && a.args[1] == "Receptacle")
        .map(|a| a.args[0].clone())
        .collect();
    let movable: Vec<String> = state0
        .atoms()
        .filter(|a| a.pred == "type" && a.args[1] == "Pickupable")
        .map(|a| a.args[0].clone())
        .collect();
    w.insert(Atom::binary("at", "agent", objects.choose(rng).unwrap()));
    let mut holding = false;
    for m in &movable {
        if !rng.gen_bool(0.3) || !w.exists(m) {
            continue;
        }
        if !holding && rng.gen_bool(0.2) {
            w.insert(Atom::binary("held_by", m, "agent"));
            holding = true;
        } else {
            let r = receptacles.choose(rng).unwrap();
            if r != m {
                let rel = if rng.gen_bool(0.5) { "inside" } else { "on_top_of" };
                w.insert(Atom::binary(rel, m, r));
            }
        }
    }
    for o in &objects {
        let openable = w.has_type(o, "Openable");
        let toggleable = w.has_type(o, "Toggleable");
        if !(openable || toggleable) || !rng.gen_bool(0.5) {
            continue;
        }
        let mut values = Vec::new();
        if openable {
            values.extend(["open", "closed"]);
        }
        if toggleable {
            values.extend(["on", "off"]);
        }
        w.insert(Atom::binary("state", o, values.choose(rng).unwrap()));
    }
    w
}

/// A random plan biased towards applicable steps so that many instances
/// run deep before failing.
pub fn random_plan<R: Rng>(rng: &mut R, state0: &WorldState, catalog: &ActionCatalog, len: usize) -> Vec<GroundedAction> {
    let all: Vec<&GroundedAction> = catalog.actions().collect();
    let mut s = RefState::from_world(state0);
    let mut plan = Vec::with_capacity(len);
    for _ in 0..len {
        let pick = if rng.gen_bool(0.75) {
            let ok: Vec<&&GroundedAction> = all.iter().filter(|a| a.name != "navigate_to_obj" && s.applicable(a)).collect();
            if ok.is_empty() || rng.gen_bool(0.25) {
                let navs: Vec<&&GroundedAction> = all.iter().filter(|a| a.name == "navigate_to_obj").collect();
                (**navs.choose(rng).unwrap()).clone()
            } else {
                (**ok.choose(rng).unwrap()).clone()
            }
        } else {
            (*all.choose(rng).unwrap()).clone()
        };
        if s.applicable(&pick) {
            s.apply(&pick);
        }
        plan.push(pick);
    }
    plan
}
