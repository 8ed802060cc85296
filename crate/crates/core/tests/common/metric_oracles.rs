//! Brute-force metric oracles: exhaustive subsequence tests, prefix
//! search and linearization enumeration by filtering all permutations.

#![allow(dead_code)]

use nsplan_core::pddl::GroundedAction;
use nsplan_core::tasks::GroundTruth;
use proptest::prelude::*;

/// Whether `needle` is an ordered subsequence of `hay`, by exhaustive
/// dynamic programming rather than a greedy scan.
pub fn is_subsequence(needle: &[GroundedAction], hay: &[GroundedAction]) -> bool {
    // dp[i][j]: needle[..i] embeds in hay[..j]
    let mut dp = vec![vec![false; hay.len() + 1]; needle.len() + 1];
    for row in dp[0].iter_mut() {
        *row = true;
    }
    for i in 1..=needle.len() {
        for j in 1..=hay.len() {
            dp[i][j] = dp[i][j - 1] || (dp[i - 1][j - 1] && needle[i - 1] == hay[j - 1]);
        }
    }
    dp[needle.len()][hay.len()]
}

/// Longest embeddable prefix, trying every prefix length from the top.
pub fn oracle_prefix(plan: &[GroundedAction], gt: &[GroundedAction]) -> usize {
    (0..=gt.len()).rev().find(|&k| is_subsequence(&gt[..k], plan)).unwrap()
}

pub fn sym(i: usize) -> GroundedAction {
    GroundedAction::new(format!("s{i}"), Vec::<String>::new())
}

pub fn syms(ix: &[usize]) -> Vec<GroundedAction> {
    ix.iter().map(|&i| sym(i)).collect()
}

/// Every permutation of 0..n kept when it moves only grouped positions,
/// each group's slots holding its segments back to back in some order.
pub fn oracle_linearizations(gt: &GroundTruth) -> Vec<Vec<GroundedAction>> {
    let n = gt.steps.len();
    let mut grouped = vec![false; n];
    let groups: Vec<(Vec<usize>, Vec<Vec<usize>>)> = gt
        .partial_order
        .iter()
        .map(|g| {
            let mut slots: Vec<usize> = g.iter().flatten().copied().collect();
            slots.sort_unstable();
            for &s in &slots {
                grouped[s] = true;
            }
            (slots, g.clone())
        })
        .collect();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permute_all(&mut perm, 0, &mut |p| {
        if (0..n).any(|i| !grouped[i] && p[i] != i) {
            return;
        }
        for (slots, segs) in &groups {
            let seen: Vec<usize> = slots.iter().map(|&s| p[s]).collect();
            if !segment_orders(segs).contains(&seen) {
                return;
            }
        }
        out.push(p.iter().map(|&i| gt.steps[i].clone()).collect());
    });
    out.sort();
    out.dedup();
    out
}

pub fn segment_orders(segs: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..segs.len()).collect();
    let mut out = Vec::new();
    permute_all(&mut idx, 0, &mut |o| out.push(o.iter().flat_map(|&s| segs[s].iter().copied()).collect()));
    out
}

pub fn permute_all(a: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == a.len() {
        f(a);
        return;
    }
    for i in k..a.len() {
        a.swap(k, i);
        permute_all(a, k + 1, f);
        a.swap(k, i);
    }
}

/// A ground truth of 2..=8 distinct steps with up to two disjoint groups
/// of contiguous segments.
pub fn partial_order_gt() -> impl Strategy<Value = GroundTruth> {
    (2usize..=8, proptest::collection::vec((0usize..8, 1usize..3, 2usize..4), 0..3)).prop_map(|(n, specs)| {
        let mut used = vec![false; n];
        let mut groups = Vec::new();
        for (start, seg_len, segs) in specs {
            let mut group = Vec::new();
            let mut at = start;
            for _ in 0..segs {
                let seg: Vec<usize> = (at..at + seg_len).collect();
                if seg.iter().any(|&i| i >= n || used[i]) {
                    break;
                }
                at += seg_len;
                group.push(seg);
            }
            if group.len() >= 2 {
                for &i in group.iter().flatten() {
                    used[i] = true;
                }
                groups.push(group);
            }
        }
        GroundTruth { steps: syms(&(0..n).collect::<Vec<_>>()), partial_order: groups }
    })
}

