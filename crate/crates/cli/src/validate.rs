//! Standalone plan validation.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use nsplan_core::kg::KnowledgeGraph;
use nsplan_core::pddl::{ground_catalog, parse_domain, GroundedAction};
use nsplan_core::validator::verify_plan;
use nsplan_core::world::WorldState;
use nsplan_core::{KITCHEN_DOMAIN, KITCHEN_TRIPLES};

/// Parses one action per line; blank lines and `#` comments are skipped.
fn parse_plan(text: &str) -> Result<Vec<GroundedAction>> {
    let mut plan = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let a = GroundedAction::parse(line).ok_or_else(|| anyhow!("line {}: cannot parse `{line}` as an action", i + 1))?;
        plan.push(a);
    }
    Ok(plan)
}

fn read_or(path: Option<&Path>, default: &str) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(default.to_string()),
    }
}

/// Exit 0 when valid, 1 when invalid, 2 when an input does not parse.
pub fn cmd_validate(plan: &Path, domain: Option<&Path>, state: Option<&Path>) -> Result<ExitCode> {
    let plan_text = fs::read_to_string(plan).with_context(|| format!("reading {}", plan.display()))?;
    let plan = parse_plan(&plan_text)?;
    let domain = parse_domain(&read_or(domain, KITCHEN_DOMAIN)?).context("parsing the domain")?;
    let kg = KnowledgeGraph::load_ontology(&read_or(state, KITCHEN_TRIPLES)?).context("parsing the state")?;
    let catalog = ground_catalog(&domain, &kg);
    let report = verify_plan(&plan, &WorldState::from_kg(&kg), &domain, &catalog);
    match &report.violation {
        None => {
            println!("valid: {}/{} steps verified", report.verified_steps, report.plan_length);
            Ok(ExitCode::SUCCESS)
        }
        Some(v) => {
            println!("invalid: {}/{} steps verified", report.verified_steps, report.plan_length);
            println!("step {} {}: failed {}", v.step + 1, v.action, v.failed.join(", "));
            Ok(ExitCode::FAILURE)
        }
    }
}
