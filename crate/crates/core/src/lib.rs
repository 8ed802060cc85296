//! Hierarchical neuro-symbolic task planning kernel.
//!
//! The crate bundles a triple-store knowledge graph, a PDDL-subset domain
//! parser and plan validator, policy-driven plan generation with symbolic
//! correction loops, a symbolic environment simulator with fault injection,
//! evaluation metrics, and a persistent macro-action library.

pub mod envsim;
pub mod kg;
pub mod macrolib;
pub mod metrics;
pub mod pddl;
pub mod planner;
pub mod rag;
pub mod similarity;
pub mod tasks;
pub mod text;
pub mod validator;
pub mod world;

/// The shipped kitchen domain.
pub const KITCHEN_DOMAIN: &str = include_str!("../fixtures/kitchen.domain");
/// The shipped kitchen ontology and initial scene.
pub const KITCHEN_TRIPLES: &str = include_str!("../fixtures/kitchen.triples");
