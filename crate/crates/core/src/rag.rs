//! Task-relevant object selection and context-subgraph extraction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{self, KnowledgeGraph, Triple};
use crate::similarity::{normalize, SimilarityError, SimilarityProvider};
use crate::world::{NEAR, YIELDS};

#[derive(Debug, Error)]
pub enum RagError {
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Classes an object selector may choose from: everything that is not an
/// action or event class.
pub fn object_classes(kg: &KnowledgeGraph) -> Vec<String> {
    kg.classes()
        .filter(|c| !kg.is_subclass(c, "Action") && !kg.is_subclass(c, "Event"))
        .filter(|c| *c != "Action" && *c != "Event")
        .map(str::to_string)
        .collect()
}

/// Lexical fallback selector: classes whose name tokens overlap the words of
/// the task text, most similar first (ties by name).
pub fn select_objects_lexical(task_text: &str, classes: &[String], sim: &SimilarityProvider) -> Result<Vec<String>, RagError> {
    let words: BTreeSet<String> = normalize(task_text).split(' ').filter(|w| !w.is_empty()).map(str::to_string).collect();
    if words.is_empty() {
        return Ok(Vec::new());
    }
    let mut hits = Vec::new();
    for c in classes {
        let tokens = kg::class_tokens(c);
        if tokens.iter().any(|t| words.contains(t)) {
            let score = sim.score(&tokens.join(" "), task_text)?;
            hits.push((c.clone(), score));
        }
    }
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(hits.into_iter().map(|(c, _)| c).collect())
}

/// Parses a selector response (one class per line, optional list markers)
/// and keeps only classes that exist, matched case-insensitively.
pub fn parse_selected_classes(response: &str, classes: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for line in crate::text::list_items(response) {
        for item in line.split(',') {
            let item = normalize(item).replace(' ', "");
            if item.is_empty() {
                continue;
            }
            if let Some(c) = classes.iter().find(|c| c.to_lowercase() == item) {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        }
    }
    out
}

/// Maps each class to its most similar instance name; classes without any
/// instance are reported as warnings and omitted.
pub fn resolve_instances(
    classes: &[String],
    kg: &KnowledgeGraph,
    sim: &SimilarityProvider,
) -> Result<(Vec<String>, Vec<String>), RagError> {
    let all = kg.instances();
    let mut resolved = Vec::new();
    let mut warnings = Vec::new();
    for c in classes {
        if kg.instances_of(c).is_empty() {
            warnings.push(format!("class `{c}` has no instances"));
            continue;
        }
        let scores = sim.score_many(c, &all)?;
        let mut best: Option<(&String, f64)> = None;
        for (inst, s) in all.iter().zip(scores) {
            // `all` is sorted, so strict improvement keeps the lexicographic tie-break.
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((inst, s));
            }
        }
        if let Some((inst, _)) = best {
            if !resolved.contains(inst) {
                resolved.push(inst.clone());
            }
        }
    }
    Ok((resolved, warnings))
}

/// One object of the retrieved subgraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextObject {
    pub instance: String,
    pub class: String,
    /// Property classes (taxonomy ancestors), e.g. `Pickupable`.
    pub properties: Vec<String>,
    pub state: Option<String>,
    /// Location and static relations where the object is subject or object.
    pub relations: Vec<Triple>,
}

/// The task-relevant subgraph handed to the policies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievedContext {
    pub objects: Vec<ContextObject>,
    pub triples: Vec<Triple>,
    pub warnings: Vec<String>,
}

impl RetrievedContext {
    pub fn instances(&self) -> Vec<String> {
        self.objects.iter().map(|o| o.instance.clone()).collect()
    }

    /// Distinct classes of the listed objects.
    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<String> = self.objects.iter().map(|o| o.class.clone()).collect();
        set.into_iter().collect()
    }

    /// Plain-text rendering used inside prompts.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for o in &self.objects {
            out.push_str(&format!("- {} ({})", o.instance, o.class));
            if !o.properties.is_empty() {
                out.push_str(&format!(" properties: {}", o.properties.join(", ")));
            }
            if let Some(s) = &o.state {
                out.push_str(&format!("; state: {s}"));
            }
            for r in &o.relations {
                out.push_str(&format!("; {} {} {}", r.subject, r.predicate, r.object));
            }
            out.push('\n');
        }
        out
    }
}

fn is_relation(p: &str) -> bool {
    kg::is_location_predicate(p) || p == kg::AT || p == NEAR || p == YIELDS
}

/// Extracts types, property triples, the state triple and every relation
/// in which the listed instances take part.
pub fn retrieve_context(kg: &KnowledgeGraph, instances: &[String]) -> Result<RetrievedContext, RagError> {
    let mut ctx = RetrievedContext::default();
    let mut triples = BTreeSet::new();
    for inst in instances {
        let class = kg.class_of(inst).ok_or_else(|| RagError::UnknownInstance(inst.clone()))?;
        let mut lineage = vec![class.clone()];
        lineage.extend(kg.ancestors(&class));
        for c in &lineage {
            triples.extend(kg.query(&kg::Pattern::parse(c, kg::SUBCLASS_OF, "*")));
        }
        triples.extend(kg.query(&kg::Pattern::parse(inst, kg::TYPE, "*")));
        let state = kg.query(&kg::Pattern::parse(inst, kg::STATE, "*"));
        triples.extend(state.iter().cloned());
        let mut relations: Vec<Triple> = kg
            .query(&kg::Pattern::parse(inst, "*", "*"))
            .into_iter()
            .chain(kg.query(&kg::Pattern::parse("*", "*", inst)))
            .filter(|t| is_relation(&t.predicate))
            .collect();
        relations.sort();
        relations.dedup();
        triples.extend(relations.iter().cloned());
        ctx.objects.push(ContextObject {
            instance: inst.clone(),
            properties: kg.ancestors(&class).into_iter().collect(),
            class,
            state: state.first().map(|t| t.object.clone()),
            relations,
        });
    }
    ctx.triples = triples.into_iter().collect();
    Ok(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kg() -> KnowledgeGraph {
        KnowledgeGraph::load_ontology(
            "Apple subclass_of Sliceable\nMug subclass_of Receptacle\nWineBottle subclass_of Pickupable\nCup subclass_of Receptacle\n\
             apple-1 type Apple\nmug-1 type Mug\nmug-1 state closed\nwinebottle-1 type WineBottle\ncup-1 type Cup\napple-1 inside mug-1\n",
        )
        .unwrap()
    }

    #[test]
    fn lexical_selection() {
        let sim = SimilarityProvider::Trigram;
        let classes = vec!["Apple".to_string(), "Mug".to_string()];
        assert_eq!(select_objects_lexical("slice the apple", &classes, &sim).unwrap(), vec!["Apple"]);
        assert!(select_objects_lexical("", &classes, &sim).unwrap().is_empty());
    }

    #[test]
    fn resolution_prefers_similar_instance() {
        let sim = SimilarityProvider::Trigram;
        let (r, w) = resolve_instances(&["WineBottle".into(), "Thing".into()], &kg(), &sim).unwrap();
        assert_eq!(r, vec!["winebottle-1"]);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn context_lists_state_and_locations() {
        let ctx = retrieve_context(&kg(), &["mug-1".into()]).unwrap();
        assert_eq!(ctx.objects[0].state.as_deref(), Some("closed"));
        assert!(ctx.triples.contains(&Triple::new("apple-1", "inside", "mug-1")));
        assert!(retrieve_context(&kg(), &[]).unwrap().objects.is_empty());
        assert!(matches!(retrieve_context(&kg(), &["ghost-1".into()]), Err(RagError::UnknownInstance(_))));
    }

    #[test]
    fn parses_selector_responses() {
        let classes = vec!["WineBottle".to_string(), "Cup".to_string()];
        assert_eq!(parse_selected_classes("1. WineBottle\n- cup\nUnicorn", &classes), vec!["WineBottle", "Cup"]);
    }
}
