//! Back-prompting loops: macro-condition correction with a retry cap, and
//! AA-block correction with a per-step attempt budget proportional to the
//! current block length and a hard block-length cap.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::conditions::{apply_condition_lines, render_conditions, render_macro_plan, verify_macro_plan, MacroAction, MacroVerification};
use super::heuristic::heuristic_correct;
use super::mapping::map_response;
use super::policy::{Policy, PolicyRequest, RequestKind};
use super::prompts::prompt;
use super::{Grounding, PlannerError};
use crate::pddl::GroundedAction;
use crate::validator::{verify_plan, ValidationReport, Violation};
use crate::world::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionLimits {
    /// Per-step attempt budget is `attempt_multiplier * x`, with x the
    /// current block length.
    pub attempt_multiplier: usize,
    /// Hard cap on block length during correction.
    pub max_block_len: usize,
    /// Retries of macro-level condition correction.
    pub macro_condition_retries: usize,
}

impl Default for CorrectionLimits {
    fn default() -> Self {
        CorrectionLimits {
            attempt_multiplier: 2,
            max_block_len: 50,
            macro_condition_retries: 3,
        }
    }
}

/// Prompt inputs shared by the macro-condition prompts.
#[derive(Debug, Clone)]
pub struct ConditionRequest<'a> {
    pub task_id: &'a str,
    pub task_text: &'a str,
    pub context: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionAttempt {
    pub attempt: usize,
    pub violation: String,
    pub verified_after: Vec<bool>,
}

/// Re-prompts with the violated condition until the macro plan verifies or
/// the retry cap is reached. Returns the final verification and the log.
pub fn correct_macro_conditions<P: Policy + ?Sized>(
    mas: &mut [MacroAction],
    state0: &WorldState,
    g: &Grounding,
    policy: &mut P,
    req: &ConditionRequest,
    retries: usize,
) -> Result<(MacroVerification, Vec<ConditionAttempt>), PlannerError> {
    let mut ver = verify_macro_plan(mas, state0, g.domain);
    let mut log = Vec::new();
    for attempt in 1..=retries {
        let Some(v) = &ver.violation else {
            break;
        };
        let violation = v.describe(mas);
        let text = prompt(
            RequestKind::CorrectConditions,
            &[
                ("task", req.task_text),
                ("macro_plan", &render_macro_plan(mas)),
                ("conditions", &render_conditions(mas)),
                ("violation", &violation),
                ("context", req.context),
            ],
        );
        let response = policy.complete(&PolicyRequest {
            kind: RequestKind::CorrectConditions,
            task_id: req.task_id.to_string(),
            macro_index: Some(v.index),
            prompt: text,
        })?;
        apply_condition_lines(mas, &response);
        ver = verify_macro_plan(mas, state0, g.domain);
        log.push(ConditionAttempt {
            attempt,
            violation,
            verified_after: ver.verified.clone(),
        });
    }
    Ok((ver, log))
}

/// Prompt inputs for block correction.
#[derive(Debug, Clone)]
pub struct BlockRequest<'a> {
    pub task_id: &'a str,
    pub macro_index: Option<usize>,
    pub subtask: &'a str,
    /// Rendered executed-action history.
    pub history: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    /// Violated step (0-based) that triggered the attempt.
    pub step: usize,
    /// Attempt number for that step, starting at 1.
    pub attempt: usize,
    /// Block length when the attempt was made.
    pub block_len: usize,
    /// Budget for the step at that moment.
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCorrection {
    pub block: Vec<GroundedAction>,
    pub valid: bool,
    /// The attempt budget of a violated step ran out.
    pub exhausted: bool,
    pub attempts: Vec<AttemptRecord>,
    pub report: ValidationReport,
}

pub fn render_block(block: &[GroundedAction], g: &Grounding) -> String {
    let mut s = String::new();
    for a in block {
        let _ = writeln!(s, "{}", g.catalog.canonical(a));
    }
    s
}

pub fn describe_violation(v: &Violation) -> String {
    format!("step {} {} precondition {} is false", v.step + 1, v.action, v.failed.join(" and "))
}

/// Validates the block from `start` and back-prompts on each violation.
///
/// Every policy response is parsed, mapped, heuristically corrected and
/// truncated to the block cap; an empty response keeps the previous
/// block. Attempts are counted per violated step and stop once a step has
/// used `attempt_multiplier * x` attempts, x being the block length at
/// that moment.
pub fn correct_aa_block<P: Policy + ?Sized>(
    block: Vec<GroundedAction>,
    start: &WorldState,
    g: &Grounding,
    policy: &mut P,
    req: &BlockRequest,
    limits: &CorrectionLimits,
) -> Result<BlockCorrection, PlannerError> {
    let mut block = block;
    block.truncate(limits.max_block_len);
    let mut attempts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut log = Vec::new();
    loop {
        let report = verify_plan(&block, start, g.domain, g.catalog);
        let Some(v) = report.violation.clone() else {
            return Ok(BlockCorrection {
                block,
                valid: true,
                exhausted: false,
                attempts: log,
                report,
            });
        };
        let x = block.len();
        let budget = limits.attempt_multiplier * x;
        let used = attempts.entry(v.step).or_insert(0);
        if *used >= budget {
            return Ok(BlockCorrection {
                block,
                valid: false,
                exhausted: true,
                attempts: log,
                report,
            });
        }
        *used += 1;
        log.push(AttemptRecord {
            step: v.step,
            attempt: *used,
            block_len: x,
            budget,
        });
        let text = prompt(
            RequestKind::CorrectBlock,
            &[
                ("history", req.history),
                ("subtask", req.subtask),
                ("block", &render_block(&block, g)),
                ("violation", &describe_violation(&v)),
            ],
        );
        let response = policy.complete(&PolicyRequest {
            kind: RequestKind::CorrectBlock,
            task_id: req.task_id.to_string(),
            macro_index: req.macro_index,
            prompt: text,
        })?;
        let mapped = map_response(&response, g.catalog, g.sim)?;
        if mapped.is_empty() {
            continue;
        }
        let mut next = heuristic_correct(&mapped, start, g.domain, g.catalog);
        next.truncate(limits.max_block_len);
        block = next;
    }
}
