//! Warm starts: a degree-ordered greedy construction and a 1-move local
//! search.

use super::bnb::Instance;
use crate::error::Result;
use crate::graph::GeometricGraph;
use crate::model::{CapacityMode, Formulation, PartitionAssignment};

/// Visit nodes by descending degree (ties by index) and give each the
/// portfolio whose sets are least represented in its closed neighbourhood so
/// far, ties by lowest portfolio. With one set per node this is the least
/// represented set, ties by lowest set index.
pub(super) fn greedy_masks(inst: &Instance) -> Option<Vec<u64>> {
    if inst.portfolios.is_empty() {
        return None;
    }
    let nodes = inst.nb.len();
    let mut order: Vec<usize> = (0..nodes).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(inst.nb[v].len()), v));
    let mut masks = vec![0u64; nodes];
    let mut done = vec![false; nodes];
    for v in order {
        let mut rep = vec![0usize; inst.n];
        for &w in &inst.nb[v] {
            if done[w] {
                for (i, r) in rep.iter_mut().enumerate() {
                    *r += (masks[w] >> i & 1) as usize;
                }
            }
        }
        let load = |p: u64| (0..inst.n).filter(|i| p >> i & 1 == 1).map(|i| rep[i]).sum::<usize>();
        let best = inst.portfolios.iter().copied().min_by_key(|&p| load(p)).expect("nonempty");
        masks[v] = best;
        done[v] = true;
    }
    Some(masks)
}

/// Greedy partition with one set per node.
pub fn greedy_incumbent(g: &GeometricGraph, n: usize) -> Result<PartitionAssignment> {
    let model = crate::model::build_model(g, n, Formulation::OptimalSoft, CapacityMode::ExactlyOne)?;
    let inst = Instance::from_model(&model)?;
    Ok(PartitionAssignment::from_masks(n, &greedy_masks(&inst).expect("exactly-one always has portfolios")))
}

/// Per-node score the local search climbs. For feasibility models the
/// count of fully covered nodes stands in for the 0/1 objective.
fn node_score(inst: &Instance, covered: u64) -> i64 {
    match inst.kind {
        Formulation::OptimalSoft => covered.count_ones() as i64,
        Formulation::MaximalSoft | Formulation::Feasibility => (covered == inst.full) as i64,
    }
}

/// First-improvement portfolio swaps until no single move helps.
pub(super) fn local_search(inst: &Instance, masks: &mut [u64], max_passes: usize) {
    let nodes = inst.nb.len();
    let n = inst.n;
    let mut count = vec![0u32; nodes * n];
    for v in 0..nodes {
        for &w in &inst.nb[v] {
            for i in 0..n {
                count[v * n + i] += (masks[w] >> i & 1) as u32;
            }
        }
    }
    let covered = |count: &[u32], u: usize| (0..n).fold(0u64, |m, i| m | ((count[u * n + i] > 0) as u64) << i);
    for _ in 0..max_passes {
        let mut improved = false;
        for v in 0..nodes {
            let old = masks[v];
            let before: i64 = inst.nb[v].iter().map(|&u| node_score(inst, covered(&count, u))).sum();
            for &p in &inst.portfolios {
                if p == old {
                    continue;
                }
                let after: i64 = inst.nb[v]
                    .iter()
                    .map(|&u| {
                        let mut c = covered(&count, u);
                        for i in 0..n {
                            let held = count[u * n + i] - (old >> i & 1) as u32 + (p >> i & 1) as u32;
                            c = (c & !(1 << i)) | ((held > 0) as u64) << i;
                        }
                        node_score(inst, c)
                    })
                    .sum();
                if after > before {
                    for &u in &inst.nb[v] {
                        for i in 0..n {
                            count[u * n + i] = count[u * n + i] - (old >> i & 1) as u32 + (p >> i & 1) as u32;
                        }
                    }
                    masks[v] = p;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::coverage_errors;

    #[test]
    fn complete_graph_gets_a_permutation() {
        let a = greedy_incumbent(&GeometricGraph::complete(3), 3).unwrap();
        let mut labels: Vec<_> = a.assign.iter().map(|s| s[0]).collect();
        labels.sort();
        assert_eq!(labels, vec![1, 2, 3]);
        let e = coverage_errors(&GeometricGraph::complete(3), &a).unwrap();
        assert_eq!((e.miss_cov, e.inc_nodes), (0, 0));
    }

    #[test]
    fn single_set_covers_everything() {
        let g = GeometricGraph::cycle(6);
        let a = greedy_incumbent(&g, 1).unwrap();
        assert!(a.assign.iter().all(|s| s == &vec![1]));
        assert_eq!(coverage_errors(&g, &a).unwrap().miss_cov, 0);
    }

    #[test]
    fn star_order_and_ties() {
        // centre first takes set 1, then leaves see {1} and take set 2
        let a = greedy_incumbent(&GeometricGraph::star(4), 3).unwrap();
        assert_eq!(a.assign, vec![vec![1], vec![2], vec![2], vec![2], vec![2]]);
    }

    #[test]
    fn local_search_never_worsens() {
        let g = GeometricGraph::cycle(9);
        let m = crate::model::build_optimal_soft(&g, 3).unwrap();
        let inst = Instance::from_model(&m).unwrap();
        let mut masks = greedy_masks(&inst).unwrap();
        let before = inst.score(&masks);
        local_search(&inst, &mut masks, 20);
        assert!(inst.score(&masks) >= before);
        assert!(PartitionAssignment::from_masks(3, &masks).respects(&CapacityMode::ExactlyOne));
    }
}
