//! Triple store holding the class taxonomy and the runtime instances of a
//! kitchen environment.
//!
//! Class names are `CapitalizedCamel`, instances are `lowercaseclass-k`.
//! Class membership uses the reserved predicate `type`, subclass links use
//! `subclass_of`. The dynamic predicates (`state`, `inside`, `on_top_of`,
//! `held_by`, `at`) are single-valued per subject and are updated by
//! replacement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TYPE: &str = "type";
pub const SUBCLASS_OF: &str = "subclass_of";
pub const STATE: &str = "state";
pub const INSIDE: &str = "inside";
pub const ON_TOP_OF: &str = "on_top_of";
pub const HELD_BY: &str = "held_by";
pub const AT: &str = "at";

/// Predicates that place a subject somewhere. A subject has at most one of them.
pub const LOCATION_PREDICATES: [&str; 3] = [INSIDE, ON_TOP_OF, HELD_BY];

/// Reserved state and location predicates.
pub const DYNAMIC_PREDICATES: [&str; 5] = [STATE, INSIDE, ON_TOP_OF, HELD_BY, AT];

pub fn is_location_predicate(p: &str) -> bool {
    LOCATION_PREDICATES.contains(&p)
}

pub fn is_dynamic_predicate(p: &str) -> bool {
    DYNAMIC_PREDICATES.contains(&p)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KgError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("taxonomy cycle through class `{0}`")]
    Cycle(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("empty triple field")]
    EmptyField,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triple {
    pub fn new(s: impl Into<String>, p: impl Into<String>, o: impl Into<String>) -> Self {
        Triple {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// A triple pattern; `None` positions match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pattern {
    pub subject: Option<String>,
    pub predicate: Option<String>,
    pub object: Option<String>,
}

impl Pattern {
    pub fn any() -> Self {
        Pattern::default()
    }

    /// Builds a pattern from three strings where `*` is a wildcard.
    pub fn parse(s: &str, p: &str, o: &str) -> Self {
        let f = |x: &str| (x != "*").then(|| x.to_string());
        Pattern {
            subject: f(s),
            predicate: f(p),
            object: f(o),
        }
    }

    pub fn matches(&self, t: &Triple) -> bool {
        self.subject.as_ref().is_none_or(|s| *s == t.subject)
            && self.predicate.as_ref().is_none_or(|p| *p == t.predicate)
            && self.object.as_ref().is_none_or(|o| *o == t.object)
    }
}

/// Splits `apple-12` into `("apple", 12)`.
pub fn split_instance(name: &str) -> Option<(&str, usize)> {
    let (prefix, idx) = name.rsplit_once('-')?;
    if prefix.is_empty() || !prefix.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()) {
        return None;
    }
    let k: usize = idx.parse().ok()?;
    (k >= 1 && !idx.starts_with('0')).then_some((prefix, k))
}

/// Splits `WineBottle` into `["wine", "bottle"]`.
pub fn class_tokens(class: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in class.chars() {
        if c.is_uppercase() && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    spo: BTreeSet<(String, String, String)>,
    pos: BTreeSet<(String, String, String)>,
    osp: BTreeSet<(String, String, String)>,
    parents: BTreeMap<String, BTreeSet<String>>,
    counters: BTreeMap<String, usize>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses a `.triples` file: one `subject predicate object` record per
    /// line, `#` starts a comment.
    pub fn load_ontology(text: &str) -> Result<Self, KgError> {
        let mut kg = KnowledgeGraph::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(KgError::Parse {
                    line: i + 1,
                    msg: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            kg.insert_raw(Triple::new(fields[0], fields[1], fields[2]));
        }
        kg.rebuild_taxonomy()?;
        kg.rebuild_counters();
        Ok(kg)
    }

    /// Deterministic serialization, sorted by subject, predicate, object.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, p, o) in &self.spo {
            out.push_str(s);
            out.push(' ');
            out.push_str(p);
            out.push(' ');
            out.push_str(o);
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo
            .contains(&(t.subject.clone(), t.predicate.clone(), t.object.clone()))
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|(s, p, o)| Triple::new(s, p, o))
    }

    fn insert_raw(&mut self, t: Triple) {
        let Triple {
            subject: s,
            predicate: p,
            object: o,
        } = t;
        self.pos.insert((p.clone(), o.clone(), s.clone()));
        self.osp.insert((o.clone(), s.clone(), p.clone()));
        self.spo.insert((s, p, o));
    }

    fn remove_raw(&mut self, t: &Triple) -> bool {
        let (s, p, o) = (&t.subject, &t.predicate, &t.object);
        self.pos.remove(&(p.clone(), o.clone(), s.clone()));
        self.osp.remove(&(o.clone(), s.clone(), p.clone()));
        self.spo.remove(&(s.clone(), p.clone(), o.clone()))
    }

    /// Inserts a triple. Taxonomy edges are checked for cycles.
    pub fn insert(&mut self, t: Triple) -> Result<(), KgError> {
        if t.subject.is_empty() || t.predicate.is_empty() || t.object.is_empty() {
            return Err(KgError::EmptyField);
        }
        let is_edge = t.predicate == SUBCLASS_OF;
        let is_type = t.predicate == TYPE;
        let subject = t.subject.clone();
        self.insert_raw(t);
        if is_edge {
            self.rebuild_taxonomy()?;
        }
        if is_type {
            if let Some((prefix, k)) = split_instance(&subject) {
                let c = self.counters.entry(prefix.to_string()).or_insert(0);
                *c = (*c).max(k);
            }
        }
        Ok(())
    }

    pub fn retract(&mut self, t: &Triple) -> bool {
        self.remove_raw(t)
    }

    /// Inserts a dynamic triple, replacing the prior value for the same
    /// subject. Location predicates share one slot per subject.
    pub fn replace_dynamic(&mut self, t: Triple) -> Result<(), KgError> {
        let stale: Vec<Triple> = if is_location_predicate(&t.predicate) {
            LOCATION_PREDICATES
                .iter()
                .flat_map(|p| self.query(&Pattern::parse(&t.subject, p, "*")))
                .collect()
        } else if is_dynamic_predicate(&t.predicate) {
            self.query(&Pattern::parse(&t.subject, &t.predicate, "*"))
        } else {
            Vec::new()
        };
        for s in stale {
            self.remove_raw(&s);
        }
        self.insert(t)
    }

    /// Returns every triple matching the pattern in lexicographic order.
    pub fn query(&self, pat: &Pattern) -> Vec<Triple> {
        let (s, p, o) = (&pat.subject, &pat.predicate, &pat.object);
        let mut out: Vec<Triple> = match (s, p, o) {
            (Some(s), _, _) => range2(&self.spo, s, p.as_deref())
                .filter(|(_, pp, oo)| p.as_ref().is_none_or(|x| x == pp) && o.as_ref().is_none_or(|x| x == oo))
                .map(|(ss, pp, oo)| Triple::new(ss, pp, oo))
                .collect(),
            (None, Some(p), _) => range2(&self.pos, p, o.as_deref())
                .map(|(pp, oo, ss)| Triple::new(ss, pp, oo))
                .collect(),
            (None, None, Some(o)) => range2(&self.osp, o, None)
                .map(|(oo, ss, pp)| Triple::new(ss, pp, oo))
                .collect(),
            (None, None, None) => self.triples().collect(),
        };
        out.sort();
        out
    }

    fn rebuild_taxonomy(&mut self) -> Result<(), KgError> {
        let mut parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for t in self.query(&Pattern::parse("*", SUBCLASS_OF, "*")) {
            parents.entry(t.object.clone()).or_default();
            parents.entry(t.subject).or_default().insert(t.object);
        }
        check_acyclic(&parents)?;
        self.parents = parents;
        Ok(())
    }

    fn rebuild_counters(&mut self) {
        self.counters.clear();
        for t in self.query(&Pattern::parse("*", TYPE, "*")) {
            if let Some((prefix, k)) = split_instance(&t.subject) {
                let c = self.counters.entry(prefix.to_string()).or_insert(0);
                *c = (*c).max(k);
            }
        }
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.parents.contains_key(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.parents.keys().map(String::as_str)
    }

    pub fn direct_parents(&self, class: &str) -> impl Iterator<Item = &str> {
        self.parents
            .get(class)
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    /// The class itself plus every transitive superclass, sorted.
    pub fn ancestors(&self, class: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![class.to_string()];
        while let Some(c) = stack.pop() {
            if seen.insert(c.clone()) {
                stack.extend(self.direct_parents(&c).map(str::to_string));
            }
        }
        seen
    }

    pub fn is_subclass(&self, class: &str, of: &str) -> bool {
        class == of || self.ancestors(class).contains(of)
    }

    /// Direct class of an instance (its single `type` triple).
    pub fn class_of(&self, instance: &str) -> Option<String> {
        self.query(&Pattern::parse(instance, TYPE, "*"))
            .into_iter()
            .next()
            .map(|t| t.object)
    }

    pub fn is_instance(&self, name: &str) -> bool {
        self.class_of(name).is_some()
    }

    pub fn instance_of(&self, instance: &str, class: &str) -> bool {
        self.class_of(instance)
            .is_some_and(|c| self.is_subclass(&c, class))
    }

    /// All instances in lexicographic order.
    pub fn instances(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .query(&Pattern::parse("*", TYPE, "*"))
            .into_iter()
            .map(|t| t.subject)
            .filter(|s| split_instance(s).is_some())
            .collect();
        v.dedup();
        v
    }

    pub fn instances_of(&self, class: &str) -> Vec<String> {
        self.instances()
            .into_iter()
            .filter(|i| self.instance_of(i, class))
            .collect()
    }

    /// Display form of an instance: `StoveBurner-1` for `stoveburner-1`.
    pub fn display_name(&self, instance: &str) -> String {
        match (self.class_of(instance), split_instance(instance)) {
            (Some(c), Some((prefix, k))) if c.to_lowercase() == prefix => format!("{c}-{k}"),
            _ => instance.to_string(),
        }
    }

    /// Creates a fresh instance `<class lowercased>-<k>`.
    pub fn instantiate(&mut self, class: &str) -> Result<String, KgError> {
        if !self.has_class(class) {
            return Err(KgError::UnknownClass(class.to_string()));
        }
        let prefix = class.to_lowercase();
        let next = self.counters.get(&prefix).copied().unwrap_or(0) + 1;
        let name = format!("{prefix}-{next}");
        self.insert(Triple::new(&name, TYPE, class))?;
        Ok(name)
    }

    /// Records an executed action as an event node and merges its outcome.
    ///
    /// The event instance takes the CamelCase class of the action name
    /// (`pick_up` -> `PickUp`), falling back to `Event`. Dynamic outcome
    /// triples replace the prior value for their subject (last writer wins).
    pub fn record_event(
        &mut self,
        action: &str,
        args: &[String],
        outcome: &[Triple],
        auditory: Option<&str>,
    ) -> Result<String, KgError> {
        for a in args {
            if !self.is_instance(a) {
                return Err(KgError::UnknownInstance(a.clone()));
            }
        }
        let class = camel_case(action);
        let class = if self.has_class(&class) {
            class
        } else if self.has_class("Event") {
            "Event".to_string()
        } else {
            return Err(KgError::UnknownClass(class));
        };
        let event = self.instantiate(&class)?;
        for (i, a) in args.iter().enumerate() {
            self.insert(Triple::new(&event, format!("arg{}", i + 1), a))?;
        }
        if let Some(label) = auditory {
            self.insert(Triple::new(&event, "auditory", label))?;
        }
        for t in outcome {
            self.replace_dynamic(t.clone())?;
            self.insert(Triple::new(&event, "outcome", format!("{}|{}|{}", t.subject, t.predicate, t.object)))?;
        }
        Ok(event)
    }

    /// State and location triples of one subject.
    pub fn dynamic_of(&self, subject: &str) -> Vec<Triple> {
        DYNAMIC_PREDICATES
            .iter()
            .flat_map(|p| self.query(&Pattern::parse(subject, p, "*")))
            .collect()
    }
}

fn range2<'a>(
    set: &'a BTreeSet<(String, String, String)>,
    first: &str,
    second: Option<&str>,
) -> impl Iterator<Item = &'a (String, String, String)> + 'a {
    let lo = (first.to_string(), second.unwrap_or("").to_string(), String::new());
    let first = first.to_string();
    let second = second.map(str::to_string);
    set.range(lo..)
        .take_while(move |(a, b, _)| *a == first && second.as_ref().is_none_or(|s| s == b))
}

fn check_acyclic(parents: &BTreeMap<String, BTreeSet<String>>) -> Result<(), KgError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit(
        c: &str,
        parents: &BTreeMap<String, BTreeSet<String>>,
        marks: &mut BTreeMap<String, Mark>,
    ) -> Result<(), KgError> {
        match marks.get(c) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Open) => return Err(KgError::Cycle(c.to_string())),
            None => {}
        }
        marks.insert(c.to_string(), Mark::Open);
        for p in parents.get(c).into_iter().flatten() {
            visit(p, parents, marks)?;
        }
        marks.insert(c.to_string(), Mark::Done);
        Ok(())
    }
    let mut marks = BTreeMap::new();
    for c in parents.keys() {
        visit(c, parents, &mut marks)?;
    }
    Ok(())
}

/// `pick_up` -> `PickUp`.
pub fn camel_case(s: &str) -> String {
    s.split(['_', '-'])
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            match cs.next() {
                Some(f) => f.to_uppercase().chain(cs).collect::<String>(),
                None => String::new(),
            }
        })
        .collect()
}
