//! Grounded actions and the finite action catalog.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Domain;
use crate::kg::{self, KnowledgeGraph};

/// A schema name applied to instance names (lowercase, `egg-1`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundedAction {
    pub name: String,
    pub args: Vec<String>,
}

impl GroundedAction {
    pub fn new<S: Into<String>>(name: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        GroundedAction {
            name: name.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses `pick_up(Egg-1)`, `put_on(Pan-1, StoveBurner-1)` or the tuple
    /// form `(put_on, Pan-1, StoveBurner-1)`. Names are normalized to
    /// lowercase with `-` in the action name read as `_`.
    pub fn parse(s: &str) -> Option<GroundedAction> {
        let s = s.trim();
        let (name, inner) = if let Some(body) = s.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
            let mut parts = body.splitn(2, ',');
            let name = parts.next()?.trim();
            (name, parts.next().unwrap_or(""))
        } else {
            let open = s.find('(')?;
            let body = s[open + 1..].strip_suffix(')')?;
            (s[..open].trim(), body)
        };
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
            return None;
        }
        let args: Vec<String> = inner
            .split(',')
            .map(|a| a.trim().to_lowercase())
            .filter(|a| !a.is_empty())
            .collect();
        if args.iter().any(|a| a.chars().any(char::is_whitespace)) {
            return None;
        }
        Some(GroundedAction::new(name.to_lowercase().replace('-', "_"), args))
    }

    /// The action's target object: the last argument.
    pub fn target(&self) -> Option<&str> {
        self.args.last().map(String::as_str)
    }
}

impl fmt::Display for GroundedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(","))
    }
}

/// Natural-language-ish form used for similarity matching:
/// `put_on(Pan-1,StoveBurner-1)` -> `put on pan 1 stove burner 1`.
pub fn sentence_form(name: &str, display_args: &[String]) -> String {
    let mut words: Vec<String> = name.split('_').map(str::to_string).collect();
    for a in display_args {
        let (class, idx) = a.rsplit_once('-').unwrap_or((a, ""));
        words.extend(kg::class_tokens(class));
        if !idx.is_empty() {
            words.push(idx.to_string());
        }
    }
    words.join(" ")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    canonical: String,
    sentence: String,
}

/// The finite set of grounded actions with canonical strings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ActionCatalog {
    entries: BTreeMap<GroundedAction, Entry>,
    by_canonical: BTreeMap<String, GroundedAction>,
    display: BTreeMap<String, String>,
}

impl ActionCatalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, a: &GroundedAction) -> bool {
        self.entries.contains_key(a)
    }

    pub fn actions(&self) -> impl Iterator<Item = &GroundedAction> {
        self.entries.keys()
    }

    /// `put_on(Pan-1,StoveBurner-1)`; falls back to the lowercase form for
    /// actions outside the catalog.
    pub fn canonical(&self, a: &GroundedAction) -> String {
        match self.entries.get(a) {
            Some(e) => e.canonical.clone(),
            None => {
                let args: Vec<String> = a.args.iter().map(|x| self.display_name(x)).collect();
                format!("{}({})", a.name, args.join(","))
            }
        }
    }

    pub fn sentence(&self, a: &GroundedAction) -> Option<&str> {
        self.entries.get(a).map(|e| e.sentence.as_str())
    }

    pub fn by_canonical(&self, s: &str) -> Option<&GroundedAction> {
        self.by_canonical.get(s)
    }

    pub fn display_name(&self, instance: &str) -> String {
        self.display.get(instance).cloned().unwrap_or_else(|| instance.to_string())
    }

    /// Instance names known to the catalog, in order.
    pub fn instances(&self) -> impl Iterator<Item = &str> {
        self.display.keys().map(String::as_str)
    }

    pub fn insert(&mut self, a: GroundedAction) {
        let args: Vec<String> = a.args.iter().map(|x| self.display_name(x)).collect();
        let canonical = format!("{}({})", a.name, args.join(","));
        let sentence = sentence_form(&a.name, &args);
        self.by_canonical.insert(canonical.clone(), a.clone());
        self.entries.insert(a, Entry { canonical, sentence });
    }
}

/// Every argument tuple whose instances satisfy the schema's class
/// constraints under the taxonomy.
pub fn ground_catalog(domain: &Domain, kg: &KnowledgeGraph) -> ActionCatalog {
    let mut cat = ActionCatalog::default();
    let instances = kg.instances();
    for i in &instances {
        cat.display.insert(i.clone(), kg.display_name(i));
    }
    for schema in &domain.actions {
        let pools: Vec<Vec<String>> = schema
            .parameters
            .iter()
            .map(|p| instances.iter().filter(|i| kg.instance_of(i, &p.class)).cloned().collect())
            .collect();
        if pools.iter().any(Vec::is_empty) && !pools.is_empty() {
            continue;
        }
        let mut tuples: Vec<Vec<String>> = vec![Vec::new()];
        for pool in &pools {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    pool.iter().map(move |x| {
                        let mut n = t.clone();
                        n.push(x.clone());
                        n
                    })
                })
                .collect();
        }
        for t in tuples {
            cat.insert(GroundedAction::new(&schema.name, t));
        }
    }
    cat
}
