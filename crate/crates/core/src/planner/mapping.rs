//! Mapping of free-form action strings onto the grounded action catalog.
//!
//! Two stages: strings shaped like `name(args)` are matched schema-first
//! and then argument-wise against the valid grounded tuples; anything else
//! is matched as a whole against each action's sentence form.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::kg;
use crate::pddl::{ActionCatalog, GroundedAction};
use crate::similarity::{SimilarityError, SimilarityProvider};
use crate::text::list_items;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("the action catalog is empty")]
    EmptyCatalog,
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Splits a policy response into raw action strings.
pub fn parse_actions(text: &str) -> Vec<String> {
    list_items(text)
}

/// Phrase used to compare a raw argument with an instance:
/// `StoveBurner-1` -> `stove burner 1`.
pub fn instance_phrase(display: &str) -> String {
    let (class, idx) = display.rsplit_once('-').unwrap_or((display, ""));
    let mut words = kg::class_tokens(class);
    if !idx.is_empty() {
        words.push(idx.to_string());
    }
    words.join(" ")
}

/// Picks the best candidate by score; ties go to the lexicographically
/// smallest canonical string.
fn argmax<'a>(scored: impl IntoIterator<Item = (&'a GroundedAction, f64)>, catalog: &ActionCatalog) -> Option<&'a GroundedAction> {
    let mut best: Option<(&GroundedAction, f64, String)> = None;
    for (a, s) in scored {
        let canon = catalog.canonical(a);
        let better = match &best {
            None => true,
            Some((_, bs, bc)) => s > *bs || (s == *bs && canon < *bc),
        };
        if better {
            best = Some((a, s, canon));
        }
    }
    best.map(|(a, _, _)| a)
}

/// Whole-string similarity of `raw` against every catalog sentence form.
pub fn map_by_sentence(raw: &str, catalog: &ActionCatalog, sim: &SimilarityProvider) -> Result<GroundedAction, MapError> {
    let actions: Vec<&GroundedAction> = catalog.actions().collect();
    if actions.is_empty() {
        return Err(MapError::EmptyCatalog);
    }
    let sentences: Vec<String> = actions
        .iter()
        .map(|a| catalog.sentence(a).unwrap_or_default().to_string())
        .collect();
    let scores = sim.score_many(raw, &sentences)?;
    Ok(argmax(actions.into_iter().zip(scores), catalog).expect("non-empty").clone())
}

/// Maps a raw action string to a catalog entry. Total on non-empty
/// catalogs and the identity on canonical strings.
pub fn map_action(raw: &str, catalog: &ActionCatalog, sim: &SimilarityProvider) -> Result<GroundedAction, MapError> {
    if catalog.is_empty() {
        return Err(MapError::EmptyCatalog);
    }
    let Some(parsed) = GroundedAction::parse(raw) else {
        return map_by_sentence(raw, catalog, sim);
    };
    if catalog.contains(&parsed) {
        return Ok(parsed);
    }
    let names: BTreeSet<&str> = catalog.actions().map(|a| a.name.as_str()).collect();
    let name = if names.contains(parsed.name.as_str()) {
        parsed.name.clone()
    } else {
        let list: Vec<String> = names.iter().map(|n| n.to_string()).collect();
        let scores = sim.score_many(&parsed.name, &list)?;
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        list[best].clone()
    };
    let same_name: Vec<&GroundedAction> = catalog.actions().filter(|a| a.name == name).collect();
    let same_arity: Vec<&GroundedAction> = same_name.iter().copied().filter(|a| a.args.len() == parsed.args.len()).collect();
    if same_arity.is_empty() || parsed.args.is_empty() {
        return map_by_sentence(raw, catalog, sim);
    }
    // Per-position similarity of each raw argument to each instance.
    let mut per_position: Vec<std::collections::BTreeMap<&str, f64>> = vec![Default::default(); parsed.args.len()];
    for a in &same_arity {
        for (k, inst) in a.args.iter().enumerate() {
            if per_position[k].contains_key(inst.as_str()) {
                continue;
            }
            let phrase = instance_phrase(&catalog.display_name(inst));
            let s = sim.score(&parsed.args[k], &phrase)?.max(sim.score(&parsed.args[k], inst)?);
            per_position[k].insert(inst.as_str(), s);
        }
    }
    let scored = same_arity.iter().map(|a| {
        let total: f64 = a.args.iter().enumerate().map(|(k, i)| per_position[k][i.as_str()]).sum();
        (*a, total / a.args.len() as f64)
    });
    Ok(argmax(scored, catalog).expect("non-empty").clone())
}

/// Parses and maps a whole response.
pub fn map_response(text: &str, catalog: &ActionCatalog, sim: &SimilarityProvider) -> Result<Vec<GroundedAction>, MapError> {
    parse_actions(text).iter().map(|r| map_action(r, catalog, sim)).collect()
}
