//! Plan-quality metrics and their aggregation into report tables.
//!
//! - PC: longest ground-truth prefix that embeds as an ordered subsequence
//!   of the generated plan, maximized over alternatives and linearizations.
//! - ES: ground-truth steps executed before the first failure (PC = 100 only).
//! - LD: signed relative length difference.
//! - EPV / MPV / AABV: verified ratios of steps, macro actions and blocks.

use serde::{Deserialize, Serialize};

use crate::pddl::GroundedAction;
use crate::tasks::{Complexity, GroundTruth};

/// Every total order of `gt` allowed by its partial-order groups. Each
/// group's segments are permuted within the positions they jointly occupy.
pub fn linearizations(gt: &GroundTruth) -> Vec<Vec<GroundedAction>> {
    let mut out = vec![gt.steps.clone()];
    for group in &gt.partial_order {
        let mut slots: Vec<usize> = group.iter().flatten().copied().collect();
        slots.sort_unstable();
        if slots.iter().any(|&i| i >= gt.steps.len()) {
            continue;
        }
        let perms = permutations(group.len());
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for base in &out {
            for p in &perms {
                let order: Vec<usize> = p.iter().flat_map(|&s| group[s].iter().copied()).collect();
                let mut lin = base.clone();
                for (slot, src) in slots.iter().zip(order) {
                    lin[*slot] = base[src].clone();
                }
                next.push(lin);
            }
        }
        out = next;
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, a, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

/// Greedy earliest embedding of the longest prefix of `gt` into `plan`;
/// returns the matched plan positions.
pub fn prefix_embedding(plan: &[GroundedAction], gt: &[GroundedAction]) -> Vec<usize> {
    let mut positions = Vec::new();
    let mut j = 0;
    for step in gt {
        match plan[j..].iter().position(|a| a == step) {
            Some(k) => {
                positions.push(j + k);
                j += k + 1;
            }
            None => break,
        }
    }
    positions
}

/// Best match of a generated plan against one ground-truth alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub alternative: usize,
    pub gt_len: usize,
    pub matched: usize,
    pub positions: Vec<usize>,
}

/// Best (alternative, linearization) by matched fraction; earlier
/// alternatives win ties.
pub fn best_alignment(plan: &[GroundedAction], gts: &[GroundTruth]) -> Option<Alignment> {
    let mut best: Option<(f64, Alignment)> = None;
    for (ai, gt) in gts.iter().enumerate() {
        for lin in linearizations(gt) {
            let pos = prefix_embedding(plan, &lin);
            let score = if lin.is_empty() { 1.0 } else { pos.len() as f64 / lin.len() as f64 };
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((
                    score,
                    Alignment {
                        alternative: ai,
                        gt_len: lin.len(),
                        matched: pos.len(),
                        positions: pos,
                    },
                ));
            }
        }
    }
    best.map(|(_, a)| a)
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        100.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// PC in percent; 0 when no ground truth is given.
pub fn plan_correctness(plan: &[GroundedAction], gts: &[GroundTruth]) -> f64 {
    best_alignment(plan, gts).map_or(0.0, |a| percent(a.matched, a.gt_len))
}

/// ES in percent, present only for fully correct plans. `executed` is the
/// number of plan steps that completed before the first failure.
pub fn execution_success(plan: &[GroundedAction], gts: &[GroundTruth], executed: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    for gt in gts {
        for lin in linearizations(gt) {
            let pos = prefix_embedding(plan, &lin);
            if pos.len() != lin.len() {
                continue;
            }
            let done = pos.iter().filter(|&&p| p < executed).count();
            let es = percent(done, lin.len());
            best = Some(best.map_or(es, |b: f64| b.max(es)));
        }
    }
    best
}

/// LD in percent: 100 * (n - |GT|) / |GT|.
pub fn length_discrepancy(plan_len: usize, gt_len: usize) -> f64 {
    if gt_len == 0 {
        return 0.0;
    }
    100.0 * (plan_len as f64 - gt_len as f64) / gt_len as f64
}

/// LD against the best-scoring alternative.
pub fn length_discrepancy_best(plan: &[GroundedAction], gts: &[GroundTruth]) -> f64 {
    match best_alignment(plan, gts) {
        Some(a) => length_discrepancy(plan.len(), a.gt_len),
        None => 0.0,
    }
}

pub fn ratio(verified: usize, total: usize) -> f64 {
    percent(verified, total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: String,
    pub method: String,
    pub complexity: Complexity,
    pub pc: f64,
    pub es: Option<f64>,
    pub ld_signed: f64,
    pub ld_abs: f64,
    pub epv: Option<f64>,
    pub mpv_before: Option<f64>,
    pub mpv_after: Option<f64>,
    pub aabv_before: Option<f64>,
    pub aabv_after: Option<f64>,
}

/// Everything a report is computed from; stored in run traces so that
/// metrics can be recomputed without replanning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFacts {
    pub task: String,
    pub method: String,
    pub complexity: Complexity,
    pub ground_truths: Vec<GroundTruth>,
    pub eplan: Vec<GroundedAction>,
    pub executed: usize,
    pub execution_failed: bool,
    /// (verified steps, plan length) of the final plan, V methods only.
    pub final_verification: Option<(usize, usize)>,
    /// Per-MA verification flags before and after correction.
    pub macro_verified: Option<(Vec<bool>, Vec<bool>)>,
    /// Per-block verification flags before and after correction.
    pub block_verified: Option<(Vec<bool>, Vec<bool>)>,
}

fn flags_ratio(f: &[bool]) -> f64 {
    ratio(f.iter().filter(|&&b| b).count(), f.len())
}

impl RunFacts {
    pub fn report(&self) -> MetricsReport {
        let pc = plan_correctness(&self.eplan, &self.ground_truths);
        let es = if pc == 100.0 {
            execution_success(&self.eplan, &self.ground_truths, self.executed)
        } else {
            None
        };
        let ld = length_discrepancy_best(&self.eplan, &self.ground_truths);
        MetricsReport {
            task: self.task.clone(),
            method: self.method.clone(),
            complexity: self.complexity,
            pc,
            es,
            ld_signed: ld,
            ld_abs: ld.abs(),
            epv: self.final_verification.map(|(v, n)| ratio(v, n)),
            mpv_before: self.macro_verified.as_ref().map(|(b, _)| flags_ratio(b)),
            mpv_after: self.macro_verified.as_ref().map(|(_, a)| flags_ratio(a)),
            aabv_before: self.block_verified.as_ref().map(|(b, _)| flags_ratio(b)),
            aabv_after: self.block_verified.as_ref().map(|(_, a)| flags_ratio(a)),
        }
    }
}

/// Per-method averages in the layout of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    pub pc_all: f64,
    pub pc_moderate: Option<f64>,
    pub pc_high: Option<f64>,
    pub ld_min: f64,
    pub ld_max: f64,
    pub ld_avg: f64,
    pub ld_abs_avg: f64,
    pub es: Option<f64>,
    pub epv: Option<f64>,
    pub mpv_before: Option<f64>,
    pub mpv_after: Option<f64>,
    pub aabv_before: Option<f64>,
    pub aabv_after: Option<f64>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.into_iter().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Groups reports by method (in first-appearance order) and averages.
pub fn aggregate(reports: &[MetricsReport]) -> Vec<MethodSummary> {
    let mut methods: Vec<String> = Vec::new();
    for r in reports {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let rs: Vec<&MetricsReport> = reports.iter().filter(|r| r.method == m).collect();
            let lds: Vec<f64> = rs.iter().map(|r| r.ld_signed).collect();
            MethodSummary {
                runs: rs.len(),
                pc_all: mean(rs.iter().map(|r| r.pc)).unwrap_or(0.0),
                pc_moderate: mean(rs.iter().filter(|r| r.complexity == Complexity::Moderate).map(|r| r.pc)),
                pc_high: mean(rs.iter().filter(|r| r.complexity == Complexity::High).map(|r| r.pc)),
                ld_min: lds.iter().copied().fold(f64::INFINITY, f64::min),
                ld_max: lds.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ld_avg: mean(lds.iter().copied()).unwrap_or(0.0),
                ld_abs_avg: mean(rs.iter().map(|r| r.ld_abs)).unwrap_or(0.0),
                es: mean(rs.iter().filter_map(|r| r.es)),
                epv: mean(rs.iter().filter_map(|r| r.epv)),
                mpv_before: mean(rs.iter().filter_map(|r| r.mpv_before)),
                mpv_after: mean(rs.iter().filter_map(|r| r.mpv_after)),
                aabv_before: mean(rs.iter().filter_map(|r| r.aabv_before)),
                aabv_after: mean(rs.iter().filter_map(|r| r.aabv_after)),
                method: m,
            }
        })
        .collect()
}

pub const CSV_COLUMNS: [&str; 11] = [
    "task",
    "method",
    "pc",
    "es",
    "ld_signed",
    "ld_abs",
    "epv",
    "mpv_before",
    "mpv_after",
    "aabv_before",
    "aabv_after",
];

pub fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.2}"),
        None => "-".to_string(),
    }
}

/// One row per report with a fixed column order; absent values are `-`.
pub fn to_csv(reports: &[MetricsReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in reports {
        w.write_record([
            r.task.clone(),
            r.method.clone(),
            fmt_value(Some(r.pc)),
            fmt_value(r.es),
            fmt_value(Some(r.ld_signed)),
            fmt_value(Some(r.ld_abs)),
            fmt_value(r.epv),
            fmt_value(r.mpv_before),
            fmt_value(r.mpv_after),
            fmt_value(r.aabv_before),
            fmt_value(r.aabv_after),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn before_after(b: Option<f64>, a: Option<f64>) -> String {
    match (b, a) {
        (None, None) => "-".into(),
        (b, a) => format!("({}) {}", fmt_value(b), fmt_value(a)),
    }
}

/// Markdown summary table: PC (all/moderate/high), LD (min/max/avg/abs
/// avg), ES, EPV, and MPV/AABV rendered as "(before) after".
pub fn to_markdown(summaries: &[MethodSummary]) -> String {
    let mut out = String::from(
        "| Method | PC all | PC moderate | PC high | LD min | LD max | LD avg | LD abs avg | ES | EPV | MPV | AABV |\n\
         |---|---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for s in summaries {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            s.method,
            fmt_value(Some(s.pc_all)),
            fmt_value(s.pc_moderate),
            fmt_value(s.pc_high),
            fmt_value(Some(s.ld_min)),
            fmt_value(Some(s.ld_max)),
            fmt_value(Some(s.ld_avg)),
            fmt_value(Some(s.ld_abs_avg)),
            fmt_value(s.es),
            fmt_value(s.epv),
            before_after(s.mpv_before, s.mpv_after),
            before_after(s.aabv_before, s.aabv_after),
        ));
    }
    out
}
