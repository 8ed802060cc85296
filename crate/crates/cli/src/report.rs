//! Result tables: row ordering, CSV and markdown output, and recomputation
//! from trace files.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use nsplan_core::metrics::{aggregate, to_csv, to_markdown, MetricsReport, RunFacts};
use nsplan_core::planner::pipeline::facts_from_jsonl;
use nsplan_core::planner::Method;
use nsplan_core::tasks;

/// Orders reports by registry task order, then by method order.
pub fn sort_reports(reports: &mut [MetricsReport]) {
    let order: Vec<String> = tasks::registry().into_iter().map(|t| t.id).collect();
    let task_rank = |id: &str| order.iter().position(|t| t == id).unwrap_or(usize::MAX);
    let method_rank = |m: &str| m.parse::<Method>().map_or(usize::MAX, |m| Method::ALL.iter().position(|x| *x == m).unwrap_or(usize::MAX));
    reports.sort_by(|a, b| {
        (task_rank(&a.task), method_rank(&a.method), &a.task, &a.method).cmp(&(task_rank(&b.task), method_rank(&b.method), &b.task, &b.method))
    });
}

pub fn summary_markdown(reports: &[MetricsReport]) -> String {
    let mut out = String::from("# Results\n\n");
    out.push_str(&format!("{} runs. MPV and AABV are shown as \"(before) after\"; \"-\" marks stages a method does not have.\n\n", reports.len()));
    out.push_str(&to_markdown(&aggregate(reports)));
    out
}

/// Writes `results.csv` and `summary.md`.
pub fn write_results(dir: &Path, reports: &mut [MetricsReport]) -> Result<()> {
    sort_reports(reports);
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("results.csv"), to_csv(reports)).context("writing results.csv")?;
    fs::write(dir.join("summary.md"), summary_markdown(reports)).context("writing summary.md")?;
    Ok(())
}

pub fn trace_file_name(task: &str, method: Method) -> String {
    format!("trace-{task}-{method}.jsonl")
}

/// Recomputes every metric from the facts stored in traces. Corrupt
/// traces are skipped with a warning and make the exit code nonzero.
pub fn cmd_metrics(traces: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let mut files: Vec<_> = fs::read_dir(traces)
        .with_context(|| format!("reading {}", traces.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("trace-") && n.ends_with(".jsonl"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        eprintln!("warning: no trace files in {}", traces.display());
    }
    let mut reports = Vec::new();
    let mut corrupt = 0;
    for f in &files {
        let facts: Result<RunFacts, String> = fs::read_to_string(f).map_err(|e| e.to_string()).and_then(|t| facts_from_jsonl(&t));
        match facts {
            Ok(facts) => reports.push(facts.report()),
            Err(e) => {
                corrupt += 1;
                eprintln!("warning: skipping {}: {e}", f.display());
            }
        }
    }
    write_results(out.unwrap_or(traces), &mut reports)?;
    println!("{} traces, {} skipped", files.len(), corrupt);
    Ok(if corrupt == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
