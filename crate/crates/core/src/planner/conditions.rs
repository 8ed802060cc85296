//! Macro actions with generated pre/postconditions, and macro-level
//! verification: each precondition must hold in the state produced by the
//! initial state and the earlier postconditions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::pddl::{collect_effect, first_failure, parse_formula, Domain, Formula, Role};
use crate::world::WorldState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroAction {
    /// 0-based position in the macro plan.
    pub index: usize,
    pub description: String,
    #[serde(default)]
    pub pre: String,
    #[serde(default)]
    pub post: String,
    pub verified_before: Option<bool>,
    pub verified_after: Option<bool>,
    /// Set when macro-level verification still fails after corrections;
    /// expansion proceeds regardless.
    #[serde(default)]
    pub flagged: bool,
}

impl MacroAction {
    pub fn new(index: usize, description: impl Into<String>) -> Self {
        MacroAction {
            index,
            description: description.into(),
            pre: String::new(),
            post: String::new(),
            verified_before: None,
            verified_after: None,
            flagged: false,
        }
    }
}

/// Numbered description list, 1-based.
pub fn render_macro_plan(mas: &[MacroAction]) -> String {
    let mut s = String::new();
    for m in mas {
        let _ = writeln!(s, "{}. {}", m.index + 1, m.description);
    }
    s
}

/// Condition lines in the response format.
pub fn render_conditions(mas: &[MacroAction]) -> String {
    let mut s = String::new();
    for m in mas {
        let _ = writeln!(s, "{} pre: {}", m.index + 1, m.pre);
        let _ = writeln!(s, "{} post: {}", m.index + 1, m.post);
    }
    s
}

/// Parses `"<n> pre: <formula>"` / `"<n> post: <formula>"` lines into a map
/// from 0-based index to (pre, post) texts. Unrecognized lines are ignored.
pub fn parse_condition_lines(text: &str) -> BTreeMap<usize, (Option<String>, Option<String>)> {
    let mut out: BTreeMap<usize, (Option<String>, Option<String>)> = BTreeMap::new();
    for line in text.lines() {
        let Some((head, formula)) = line.split_once(':') else {
            continue;
        };
        let head = head.trim().to_lowercase();
        let digits: String = head.chars().filter(char::is_ascii_digit).collect();
        let Ok(n) = digits.parse::<usize>() else {
            continue;
        };
        if n == 0 {
            continue;
        }
        let slot = out.entry(n - 1).or_default();
        let formula = formula.trim().to_string();
        if head.ends_with("pre") {
            slot.0 = Some(formula);
        } else if head.ends_with("post") {
            slot.1 = Some(formula);
        }
    }
    out
}

/// Writes parsed condition texts into the macro actions; macro actions not
/// mentioned in the response keep their previous conditions.
pub fn apply_condition_lines(mas: &mut [MacroAction], text: &str) {
    for (i, (pre, post)) in parse_condition_lines(text) {
        if let Some(m) = mas.get_mut(i) {
            if let Some(p) = pre {
                m.pre = p;
            }
            if let Some(p) = post {
                m.post = p;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionFault {
    /// The precondition or postcondition text does not parse.
    Unparseable,
    /// The precondition is false in the propagated state.
    Unsatisfied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroViolation {
    pub index: usize,
    pub fault: ConditionFault,
    /// Failed atoms, or the parse error.
    pub detail: Vec<String>,
}

impl MacroViolation {
    pub fn describe(&self, mas: &[MacroAction]) -> String {
        let what = match self.fault {
            ConditionFault::Unparseable => "conditions could not be parsed",
            ConditionFault::Unsatisfied => "precondition does not hold",
        };
        let desc = mas.get(self.index).map(|m| m.description.as_str()).unwrap_or("");
        format!("subtask {} ({desc}): {what}: {}", self.index + 1, self.detail.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroVerification {
    pub verified: Vec<bool>,
    /// The first problem in plan order.
    pub violation: Option<MacroViolation>,
}

impl MacroVerification {
    pub fn all_verified(&self) -> bool {
        self.verified.iter().all(|&b| b)
    }
}

fn parse_pair(m: &MacroAction, domain: &Domain) -> Result<(Formula, Formula), String> {
    let pre = parse_formula(&m.pre, &domain.predicates, Role::Condition).map_err(|e| format!("pre: {e}"))?;
    let post = parse_formula(&m.post, &domain.predicates, Role::Effect).map_err(|e| format!("post: {e}"))?;
    Ok((pre, post))
}

/// Walks the macro plan from `state0`. A macro action is verified when both
/// formulas parse and its precondition holds; its postcondition is applied
/// as an effect whenever it parses, so one failure does not cascade.
pub fn verify_macro_plan(mas: &[MacroAction], state0: &WorldState, domain: &Domain) -> MacroVerification {
    let mut state = state0.clone();
    let mut verified = Vec::with_capacity(mas.len());
    let mut violation = None;
    for m in mas {
        let mut note = |fault, detail: Vec<String>| {
            if violation.is_none() {
                violation = Some(MacroViolation {
                    index: m.index,
                    fault,
                    detail,
                });
            }
        };
        let (pre, post) = match parse_pair(m, domain) {
            Ok(p) => p,
            Err(e) => {
                note(ConditionFault::Unparseable, vec![e]);
                verified.push(false);
                if let Ok(post) = parse_formula(&m.post, &domain.predicates, Role::Effect) {
                    if let Ok(eff) = collect_effect(&post, &state) {
                        state.apply(&eff);
                    }
                }
                continue;
            }
        };
        let ok = match first_failure(&pre, &state) {
            Ok(None) => true,
            Ok(Some(failed)) => {
                note(ConditionFault::Unsatisfied, failed.iter().map(ToString::to_string).collect());
                false
            }
            Err(e) => {
                note(ConditionFault::Unparseable, vec![e.to_string()]);
                false
            }
        };
        match collect_effect(&post, &state) {
            Ok(eff) => {
                state.apply(&eff);
                verified.push(ok);
            }
            Err(e) => {
                note(ConditionFault::Unparseable, vec![e.to_string()]);
                verified.push(false);
            }
        }
    }
    MacroVerification { verified, violation }
}
