//! Graph queries, retrieval, similarity and the macro library against
//! linear-scan and brute-force oracles.

use std::collections::{BTreeMap, BTreeSet};

use nsplan_core::kg::{KnowledgeGraph, Pattern, Triple};
use nsplan_core::macrolib::{LibraryEntry, MacroLibrary};
use nsplan_core::rag::{resolve_instances, retrieve_context, select_objects_lexical};
use nsplan_core::similarity::{trigram_cosine, SimilarityProvider};
use nsplan_core::KITCHEN_TRIPLES;
use proptest::prelude::*;

#[test]
fn fixture_triple_count_matches_its_lines() {
    let kg = KnowledgeGraph::load_ontology(KITCHEN_TRIPLES).unwrap();
    let lines: BTreeSet<&str> = KITCHEN_TRIPLES
        .lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .collect();
    assert_eq!(kg.len(), lines.len());
    let line_count = KITCHEN_TRIPLES.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')).count();
    assert_eq!(line_count, lines.len(), "the fixture has no duplicate records");
}

fn taxonomy_is_acyclic(kg: &KnowledgeGraph) -> bool {
    let mut edges: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in kg.query(&Pattern::parse("*", "subclass_of", "*")) {
        edges.entry(t.subject).or_default().push(t.object);
    }
    // Depth-first search with an explicit on-stack set.
    fn visit(n: &str, edges: &BTreeMap<String, Vec<String>>, on: &mut BTreeSet<String>, done: &mut BTreeSet<String>) -> bool {
        if done.contains(n) {
            return true;
        }
        if !on.insert(n.to_string()) {
            return false;
        }
        let ok = edges.get(n).into_iter().flatten().all(|m| visit(m, edges, on, done));
        on.remove(n);
        done.insert(n.to_string());
        ok
    }
    let (mut on, mut done) = (BTreeSet::new(), BTreeSet::new());
    edges.keys().all(|k| visit(k, &edges, &mut on, &mut done))
}

#[test]
fn fixture_taxonomy_is_acyclic() {
    assert!(taxonomy_is_acyclic(&KnowledgeGraph::load_ontology(KITCHEN_TRIPLES).unwrap()));
}

const NAMES: [&str; 8] = ["apple-1", "fridge-1", "mug-1", "cup-1", "Apple", "Fridge", "closed", "agent"];
const PREDS: [&str; 5] = ["type", "inside", "on_top_of", "state", "near"];

fn random_graph() -> impl Strategy<Value = Vec<(usize, usize, usize)>> {
    proptest::collection::vec((0..NAMES.len(), 0..PREDS.len(), 0..NAMES.len()), 0..400)
}

fn build(ts: &[(usize, usize, usize)]) -> KnowledgeGraph {
    let mut kg = KnowledgeGraph::new();
    for &(s, p, o) in ts {
        kg.insert(Triple::new(NAMES[s], PREDS[p], NAMES[o])).unwrap();
    }
    kg
}

fn pattern_part(i: Option<usize>, pool: &[&str]) -> String {
    i.map_or("*".to_string(), |i| pool[i].to_string())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn query_equals_linear_scan(ts in random_graph(), s in proptest::option::of(0..NAMES.len()), p in proptest::option::of(0..PREDS.len()), o in proptest::option::of(0..NAMES.len())) {
        let kg = build(&ts);
        let (s, p, o) = (pattern_part(s, &NAMES), pattern_part(p, &PREDS), pattern_part(o, &NAMES));
        let mut scan: Vec<Triple> = ts
            .iter()
            .map(|&(a, b, c)| Triple::new(NAMES[a], PREDS[b], NAMES[c]))
            .filter(|t| (s == "*" || t.subject == s) && (p == "*" || t.predicate == p) && (o == "*" || t.object == o))
            .collect();
        scan.sort();
        scan.dedup();
        prop_assert_eq!(kg.query(&Pattern::parse(&s, &p, &o)), scan);
    }

    #[test]
    fn retrieved_context_is_the_membership_filter(ts in random_graph(), pick in proptest::collection::btree_set(0usize..4, 0..4)) {
        let mut kg = build(&ts);
        for (inst, class) in [("apple-1", "Apple"), ("fridge-1", "Fridge"), ("mug-1", "Mug"), ("cup-1", "Cup")] {
            // Retrieval needs a single class per instance.
            for t in kg.query(&Pattern::parse(inst, "type", "*")) {
                kg.retract(&t);
            }
            kg.insert(Triple::new(inst, "type", class)).unwrap();
        }
        let instances: Vec<String> = pick.iter().map(|&i| NAMES[i].to_string()).collect();
        let ctx = retrieve_context(&kg, &instances).unwrap();
        let all: BTreeSet<Triple> = kg.triples().collect();
        let ctx_set: BTreeSet<Triple> = ctx.triples.iter().cloned().collect();
        prop_assert!(ctx_set.is_subset(&all));
        let relation = |p: &str| matches!(p, "inside" | "on_top_of" | "held_by" | "at" | "near" | "yields");
        let members: BTreeSet<&str> = instances.iter().map(String::as_str).collect();
        let expected: BTreeSet<Triple> = all
            .iter()
            .filter(|t| {
                let touches = members.contains(t.subject.as_str()) || members.contains(t.object.as_str());
                let own = members.contains(t.subject.as_str()) && matches!(t.predicate.as_str(), "type" | "state");
                own || (touches && relation(&t.predicate))
            })
            .cloned()
            .collect();
        // Taxonomy lines of the members' classes come on top of the scan.
        let rest: BTreeSet<Triple> = ctx_set.difference(&expected).cloned().collect();
        prop_assert!(rest.iter().all(|t| t.predicate == "subclass_of"), "{:?}", rest);
        prop_assert!(expected.is_subset(&ctx_set));
    }
}

/// Trigram cosine computed the long way: explicit count vectors over the
/// union of grams.
fn oracle_cosine(a: &str, b: &str) -> f64 {
    let norm = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' })
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
    };
    let grams = |s: &str| -> Vec<String> {
        let c: Vec<char> = norm(s).chars().collect();
        match c.len() {
            0 => vec![],
            1 | 2 => vec![c.iter().collect()],
            _ => (0..c.len() - 2).map(|i| c[i..i + 3].iter().collect()).collect(),
        }
    };
    if norm(a) == norm(b) {
        return 1.0;
    }
    let (ga, gb) = (grams(a), grams(b));
    let vocab: BTreeSet<&String> = ga.iter().chain(&gb).collect();
    let count = |g: &[String], x: &String| g.iter().filter(|y| *y == x).count() as f64;
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for v in vocab {
        let (x, y) = (count(&ga, v), count(&gb, v));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trigram_cosine_matches_the_long_way(a in "[a-zA-Z ,-]{0,20}", b in "[a-zA-Z ,-]{0,20}") {
        let got = trigram_cosine(&a, &b);
        prop_assert!((got - oracle_cosine(&a, &b)).abs() < 1e-12);
        prop_assert_eq!(got, trigram_cosine(&b, &a));
        prop_assert!((0.0..=1.0).contains(&got));
    }
}

#[test]
fn resolution_follows_the_similarity_argmax() {
    let kg = KnowledgeGraph::load_ontology("WineBottle subclass_of Pickupable\nCup subclass_of Receptacle\nwinebottle-1 type WineBottle\ncup-1 type Cup\n").unwrap();
    let sim = SimilarityProvider::Trigram;
    let (got, _) = resolve_instances(&["WineBottle".to_string()], &kg, &sim).unwrap();
    assert_eq!(got, ["winebottle-1"]);
    assert!(oracle_cosine("WineBottle", "winebottle-1") > oracle_cosine("WineBottle", "cup-1"));
    let two = KnowledgeGraph::load_ontology("Apple subclass_of Sliceable\napple-1 type Apple\napple-2 type Apple\n").unwrap();
    assert_eq!(resolve_instances(&["Apple".to_string()], &two, &sim).unwrap().0, ["apple-1"]);
}

#[test]
fn lexical_selection_is_token_overlap() {
    let sim = SimilarityProvider::Trigram;
    let classes = vec!["Apple".to_string(), "Mug".to_string()];
    assert_eq!(select_objects_lexical("slice the apple", &classes, &sim).unwrap(), ["Apple"]);
    assert!(select_objects_lexical("", &classes, &sim).unwrap().is_empty());
}

fn entry(description: &str) -> LibraryEntry {
    LibraryEntry {
        id: 0,
        description: description.into(),
        pre: "(and)".into(),
        post: "(and)".into(),
        block: vec!["pick_up(Egg-1)".into()],
        agent: "robot-a".into(),
        success: true,
        cluster: None,
    }
}

/// Connected components of the "similarity at least t" graph, by
/// repeated relabelling until nothing changes.
fn oracle_clusters(descs: &[&str], t: f64) -> usize {
    let mut label: Vec<usize> = (0..descs.len()).collect();
    loop {
        let mut changed = false;
        for i in 0..descs.len() {
            for j in 0..descs.len() {
                if oracle_cosine(descs[i], descs[j]) >= t && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    label.iter().collect::<BTreeSet<_>>().len()
}

#[test]
fn clustering_example_matches_pairwise_oracle() {
    let descs = ["pick up the wine bottle", "pick up the bottle of wine", "toast bread"];
    assert_eq!(oracle_clusters(&descs, 0.5), 2);
    let sim = SimilarityProvider::Trigram;
    let mut lib = MacroLibrary::new();
    for d in descs {
        lib.store(entry(d)).unwrap();
    }
    let assignment = lib.cluster(0.5, &sim).unwrap();
    let clusters: BTreeSet<usize> = assignment.iter().map(|&(_, c)| c).collect();
    assert_eq!(clusters.len(), 2);
    let of = |id: usize| assignment.iter().find(|(i, _)| *i == id).unwrap().1;
    assert_eq!(of(1), of(2));
    assert_ne!(of(1), of(3));
}

#[test]
fn near_duplicate_lookup_resolves_to_the_argmax() {
    let sim = SimilarityProvider::Trigram;
    let mut lib = MacroLibrary::new();
    let stored = ["Pick up the bottle of wine", "Pour wine into the cup", "Turn on the stove burner"];
    for d in stored {
        lib.store(entry(d)).unwrap();
    }
    let query = "pick up the wine bottle";
    let best = stored
        .iter()
        .enumerate()
        .max_by(|a, b| oracle_cosine(query, a.1).total_cmp(&oracle_cosine(query, b.1)).then(b.0.cmp(&a.0)))
        .unwrap();
    let hit = lib.lookup(query, 0.0, &sim).unwrap().unwrap();
    assert_eq!(hit.description, *best.1);
    assert!(lib.lookup(query, 0.99, &sim).unwrap().is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clustering_ignores_insertion_order(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(), t in 0.0f64..=1.0) {
        let descs = ["pick up the egg", "pick up the eggs", "crack the egg", "slice the bread", "slice bread", "toggle the stove"];
        let sim = SimilarityProvider::Trigram;
        // Ids are fixed per description; only the insertion order varies.
        let mut a = MacroLibrary::new();
        for d in descs {
            a.store(entry(d)).unwrap();
        }
        let text = a.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        let shuffled: String = perm.iter().map(|&i| format!("{}\n", lines[i])).collect();
        let mut b = MacroLibrary::from_jsonl(&shuffled).unwrap();
        let partition = |lib: &mut MacroLibrary| {
            let assignment = lib.cluster(t, &sim).unwrap();
            let ids: BTreeMap<usize, String> = lib.entries().iter().map(|e| (e.id, e.description.clone())).collect();
            let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
            for (id, c) in assignment {
                groups.entry(c).or_default().insert(ids[&id].clone());
            }
            groups.into_values().collect::<BTreeSet<_>>()
        };
        let pa = partition(&mut a);
        prop_assert_eq!(&pa, &partition(&mut b));
        prop_assert_eq!(pa.len(), oracle_clusters(&descs, t));
    }
}
