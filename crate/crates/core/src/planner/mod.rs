//! Plan generation over pluggable text policies: macro plans and their
//! conditions, expansion into grounded action blocks, heuristic and
//! back-prompt corrections, and the end-to-end pipeline for every method
//! configuration.

pub mod conditions;
pub mod correction;
pub mod heuristic;
pub mod mapping;
pub mod pipeline;
pub mod policy;
pub mod prompts;
pub mod scripted;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pddl::{ActionCatalog, Domain};
use crate::rag::RagError;
use crate::similarity::SimilarityProvider;
use mapping::MapError;
use policy::PolicyError;

pub use conditions::MacroAction;
pub use correction::{correct_aa_block, correct_macro_conditions, CorrectionLimits};
pub use heuristic::heuristic_correct;
pub use mapping::{map_action, parse_actions};
pub use pipeline::{run_pipeline, PipelineConfig, RunTrace, TraceRecord};
pub use policy::{Policy, PolicyRequest, RequestKind};

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Rag(#[from] RagError),
    #[error("the policy returned an empty macro plan")]
    DegeneratePlan,
    #[error("the policy returned an empty block for subtask {0}")]
    EmptyBlock(usize),
}

/// The symbolic side shared by every planning step.
#[derive(Clone, Copy)]
pub struct Grounding<'a> {
    pub domain: &'a Domain,
    pub catalog: &'a ActionCatalog,
    pub sim: &'a SimilarityProvider,
}

/// The six configurations, one per combination of hierarchy (H),
/// verification (V) and retrieval (R) that is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "HVR")]
    Hvr,
    #[serde(rename = "HV")]
    Hv,
    #[serde(rename = "HR")]
    Hr,
    #[serde(rename = "VR")]
    Vr,
    #[serde(rename = "R")]
    R,
    #[serde(rename = "LLM")]
    Llm,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Hvr, Method::Hv, Method::Hr, Method::Vr, Method::R, Method::Llm];

    /// (hierarchy, verification, retrieval)
    pub fn flags(self) -> (bool, bool, bool) {
        match self {
            Method::Hvr => (true, true, true),
            Method::Hv => (true, true, false),
            Method::Hr => (true, false, true),
            Method::Vr => (false, true, true),
            Method::R => (false, false, true),
            Method::Llm => (false, false, false),
        }
    }

    pub fn from_flags(h: bool, v: bool, r: bool) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.flags() == (h, v, r))
    }

    pub fn hierarchy(self) -> bool {
        self.flags().0
    }

    pub fn verification(self) -> bool {
        self.flags().1
    }

    pub fn retrieval(self) -> bool {
        self.flags().2
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Hvr => "HVR",
            Method::Hv => "HV",
            Method::Hr => "HR",
            Method::Vr => "VR",
            Method::R => "R",
            Method::Llm => "LLM",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}` (expected one of HVR, HV, HR, VR, R, LLM)"))
    }
}
