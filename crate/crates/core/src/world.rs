//! Symbolic world state: a set of ground atoms with single-valued state and
//! location fluents, plus the derived predicates `hand_empty` and
//! `reachable`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kg::{self, KnowledgeGraph, Pattern, Triple};

/// The single robot arm. Not a graph instance but a domain constant.
pub const AGENT: &str = "agent";

pub const HAND_EMPTY: &str = "hand_empty";
pub const REACHABLE: &str = "reachable";
pub const NEAR: &str = "near";
pub const YIELDS: &str = "yields";

/// States under which an object no longer physically exists.
pub const ABSENT: &str = "absent";
pub const CONSUMED: &str = "consumed";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<S: Into<String>>(pred: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Atom {
            pred: pred.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn binary(pred: &str, a: &str, b: &str) -> Self {
        Atom::new(pred, [a, b])
    }

    /// `(s, p, o)` for binary atoms.
    pub fn to_triple(&self) -> Option<Triple> {
        match self.args.as_slice() {
            [s, o] => Some(Triple::new(s, &self.pred, o)),
            _ => None,
        }
    }

    pub fn from_triple(t: &Triple) -> Self {
        Atom::binary(&t.predicate, &t.subject, &t.object)
    }

    pub fn is_dynamic(&self) -> bool {
        self.args.len() == 2 && kg::is_dynamic_predicate(&self.pred)
    }

    pub fn subject(&self) -> Option<&str> {
        self.args.first().map(String::as_str)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// Ground add/delete lists of one action application.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundEffect {
    pub dels: Vec<Atom>,
    pub adds: Vec<Atom>,
    pub cond_dels: Vec<Atom>,
    pub cond_adds: Vec<Atom>,
}

impl GroundEffect {
    pub fn all_adds(&self) -> impl Iterator<Item = &Atom> {
        self.adds.iter().chain(&self.cond_adds)
    }

    pub fn all_dels(&self) -> impl Iterator<Item = &Atom> {
        self.dels.iter().chain(&self.cond_dels)
    }

    /// Subjects whose atoms this effect may change.
    pub fn subjects(&self) -> BTreeSet<String> {
        self.all_adds()
            .chain(self.all_dels())
            .filter_map(|a| a.subject().map(str::to_string))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    atoms: BTreeSet<Atom>,
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let mut s = WorldState::new();
        for a in atoms {
            s.insert(a);
        }
        s
    }

    /// Lifts a graph snapshot: dynamic triples, `near` and `yields` facts,
    /// and one `type` atom per instance and ancestor class.
    pub fn from_kg(kg: &KnowledgeGraph) -> Self {
        let mut s = WorldState::new();
        for p in kg::DYNAMIC_PREDICATES.iter().chain(&[NEAR, YIELDS]) {
            for t in kg.query(&Pattern::parse("*", p, "*")) {
                s.atoms.insert(Atom::from_triple(&t));
            }
        }
        for inst in kg.instances() {
            if let Some(c) = kg.class_of(&inst) {
                for anc in kg.ancestors(&c) {
                    s.atoms.insert(Atom::binary(kg::TYPE, &inst, &anc));
                }
            }
        }
        s
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.contains(a)
    }

    fn with_pred_subject(&self, pred: &str, subject: &str) -> impl Iterator<Item = &Atom> + '_ {
        let lo = Atom::new(pred, [subject]);
        let (pred, subject) = (pred.to_string(), subject.to_string());
        self.atoms
            .range(lo..)
            .take_while(move |a| a.pred == pred && a.args.first() == Some(&subject))
    }

    /// Inserts an atom, replacing any conflicting single-valued fluent.
    pub fn insert(&mut self, a: Atom) {
        if a.args.len() == 2 {
            let subject = a.args[0].clone();
            let stale: Vec<Atom> = if kg::is_location_predicate(&a.pred) {
                kg::LOCATION_PREDICATES
                    .iter()
                    .flat_map(|p| self.with_pred_subject(p, &subject).cloned().collect::<Vec<_>>())
                    .collect()
            } else if a.pred == kg::STATE || a.pred == kg::AT {
                self.with_pred_subject(&a.pred, &subject).cloned().collect()
            } else {
                Vec::new()
            };
            for s in stale {
                self.atoms.remove(&s);
            }
        }
        self.atoms.insert(a);
    }

    pub fn remove(&mut self, a: &Atom) -> bool {
        self.atoms.remove(a)
    }

    /// Delete list, then add list, then conditional effects.
    pub fn apply(&mut self, eff: &GroundEffect) {
        for d in &eff.dels {
            self.remove(d);
        }
        for a in &eff.adds {
            self.insert(a.clone());
        }
        for d in &eff.cond_dels {
            self.remove(d);
        }
        for a in &eff.cond_adds {
            self.insert(a.clone());
        }
    }

    pub fn agent_location(&self) -> Option<&str> {
        self.with_pred_subject(kg::AT, AGENT).next().map(|a| a.args[1].as_str())
    }

    pub fn held(&self) -> Vec<&str> {
        self.atoms
            .iter()
            .filter(|a| a.pred == kg::HELD_BY && a.args.len() == 2 && a.args[1] == AGENT)
            .map(|a| a.args[0].as_str())
            .collect()
    }

    /// The location atom of `o`, if any.
    pub fn location_of(&self, o: &str) -> Option<&Atom> {
        kg::LOCATION_PREDICATES
            .iter()
            .find_map(|p| self.with_pred_subject(p, o).next())
    }

    pub fn state_of(&self, o: &str) -> Option<&str> {
        self.with_pred_subject(kg::STATE, o).next().map(|a| a.args[1].as_str())
    }

    pub fn has_type(&self, o: &str, class: &str) -> bool {
        self.contains(&Atom::binary(kg::TYPE, o, class))
    }

    fn near(&self, a: &str, b: &str) -> bool {
        self.contains(&Atom::binary(NEAR, a, b)) || self.contains(&Atom::binary(NEAR, b, a))
    }

    /// `o` followed by its containers (`inside`/`on_top_of`), innermost first.
    pub fn container_chain(&self, o: &str) -> Vec<String> {
        let mut chain = vec![o.to_string()];
        let mut cur = o.to_string();
        while let Some(loc) = self.location_of(&cur) {
            if loc.pred == kg::HELD_BY {
                break;
            }
            let next = loc.args[1].clone();
            if chain.contains(&next) {
                break;
            }
            chain.push(next.clone());
            cur = next;
        }
        chain
    }

    pub fn exists(&self, o: &str) -> bool {
        !matches!(self.state_of(o), Some(ABSENT) | Some(CONSUMED))
    }

    pub fn hand_empty(&self) -> bool {
        self.held().is_empty()
    }

    /// Whether the agent can act on `o` from where it stands: `o` is held,
    /// or `o` or one of its containers is the agent's location or next to
    /// it, or `o` contains the agent's location.
    pub fn reachable(&self, o: &str) -> bool {
        if !self.exists(o) {
            return false;
        }
        if self.contains(&Atom::binary(kg::HELD_BY, o, AGENT)) {
            return true;
        }
        let Some(loc) = self.agent_location() else {
            return false;
        };
        self.container_chain(o)
            .iter()
            .any(|x| x == loc || self.near(x, loc))
            || self.container_chain(loc).iter().any(|x| x == o)
    }

    /// Truth of one ground atom, including derived predicates.
    pub fn holds(&self, a: &Atom) -> bool {
        match (a.pred.as_str(), a.args.as_slice()) {
            (HAND_EMPTY, []) => self.hand_empty(),
            (REACHABLE, [o]) => self.reachable(o),
            _ => self.contains(a),
        }
    }

    /// Every state and location atom as a scene-graph triple.
    pub fn observe(&self) -> Vec<Triple> {
        self.atoms
            .iter()
            .filter(|a| a.is_dynamic())
            .filter_map(Atom::to_triple)
            .collect()
    }

    /// Dynamic atoms only.
    pub fn dynamic_atoms(&self) -> BTreeSet<Atom> {
        self.atoms.iter().filter(|a| a.is_dynamic()).cloned().collect()
    }

    /// At most one held object and exactly one agent location.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.held().len() > 1 {
            return Err(format!("agent holds {:?}", self.held()));
        }
        let locs = self.with_pred_subject(kg::AT, AGENT).count();
        if locs != 1 {
            return Err(format!("agent has {locs} location atoms"));
        }
        Ok(())
    }
}
