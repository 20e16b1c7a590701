//! Exhaustive oracle for tiny instances.

use std::time::Instant;

use super::check::{complete_solution, objective_value, violated_rows};
use super::{SolveReport, SolveStatus};
use crate::error::{Error, Result};
use crate::model::{CapacityMode, Formulation, IlpModel, PartitionAssignment, RowFamily};

pub const DEFAULT_ORACLE_CAP: f64 = 1e7;

/// Largest n whose 2^n per-node vectors the oracle will enumerate.
const MAX_ORACLE_SETS: usize = 20;

pub fn brute_force(model: &IlpModel) -> Result<SolveReport> {
    brute_force_with_cap(model, DEFAULT_ORACLE_CAP)
}

/// Enumerate every admissible assignment in odometer order (node 0 slowest)
/// and keep the first one with the best objective.
pub fn brute_force_with_cap(model: &IlpModel, cap: f64) -> Result<SolveReport> {
    let start = Instant::now();
    let n = model.meta.n;
    let nodes = model.meta.node_count;
    let size = match model.meta.capacity {
        CapacityMode::ExactlyOne => (n as f64).powi(nodes as i32),
        _ => 2f64.powi((n * nodes) as i32),
    };
    if size > cap || n > MAX_ORACLE_SETS {
        return Err(Error::TooLargeForOracle { size, cap });
    }

    // admissible x vectors per node, tested against that node's capacity row
    let mut options: Vec<Vec<u64>> = vec![Vec::new(); nodes];
    for row in model.constraints.iter().filter(|r| r.family == RowFamily::Capacity) {
        let v = row.node.0;
        for mask in 0u64..1 << n {
            let lhs: f64 = row
                .terms
                .iter()
                .map(|&(j, c)| if mask >> (j - v * n) & 1 == 1 { c } else { 0.0 })
                .sum();
            if row.relation.holds(lhs, row.rhs) {
                options[v].push(mask);
            }
        }
    }

    let mut best: Option<(f64, Vec<u64>)> = None;
    let mut explored = 0u64;
    if options.iter().all(|o| !o.is_empty()) {
        let mut digits = vec![0usize; nodes];
        'outer: loop {
            explored += 1;
            let masks: Vec<u64> = digits.iter().enumerate().map(|(v, &d)| options[v][d]).collect();
            let candidate = PartitionAssignment::from_masks(n, &masks);
            let values = complete_solution(model, &candidate)?;
            if violated_rows(model, &values).is_empty() {
                let obj = objective_value(model, &values);
                if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                    best = Some((obj, masks));
                    if model.meta.formulation == Formulation::Feasibility {
                        break;
                    }
                }
            }
            let mut v = nodes;
            loop {
                if v == 0 {
                    break 'outer;
                }
                v -= 1;
                digits[v] += 1;
                if digits[v] < options[v].len() {
                    break;
                }
                digits[v] = 0;
            }
        }
    }

    let wall_time = start.elapsed().as_secs_f64();
    Ok(match best {
        Some((obj, masks)) => SolveReport {
            status: SolveStatus::Optimal,
            assignment: Some(PartitionAssignment::from_masks(n, &masks)),
            objective: Some(obj),
            best_bound: Some(obj),
            wall_time,
            explored_nodes: explored,
            message: None,
        },
        None => SolveReport::infeasible(wall_time, explored),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeometricGraph;
    use crate::model::*;

    fn objective(m: &IlpModel) -> Option<f64> {
        brute_force(m).unwrap().objective
    }

    #[test]
    fn soft_examples() {
        let p2 = GeometricGraph::path(2);
        let star = GeometricGraph::star(4);
        let k3 = GeometricGraph::complete(3);
        assert_eq!(objective(&build_optimal_soft(&p2, 3).unwrap()), Some(4.0));
        assert_eq!(objective(&build_maximal_soft(&p2, 3).unwrap()), Some(0.0));
        assert_eq!(objective(&build_optimal_soft(&star, 3).unwrap()), Some(11.0));
        assert_eq!(objective(&build_maximal_soft(&star, 3).unwrap()), Some(1.0));
        assert_eq!(objective(&build_optimal_soft(&k3, 3).unwrap()), Some(9.0));
        assert_eq!(objective(&build_maximal_soft(&k3, 3).unwrap()), Some(3.0));
    }

    #[test]
    fn feasibility_examples() {
        let k3 = brute_force(&build_domatic_feasibility(&GeometricGraph::complete(3), 3).unwrap()).unwrap();
        assert_eq!(k3.status, SolveStatus::Optimal);
        let labels: Vec<_> = k3.assignment.unwrap().assign.into_iter().map(|s| s[0]).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 2, 3]);
        let star = brute_force(&build_domatic_feasibility(&GeometricGraph::star(4), 3).unwrap()).unwrap();
        assert_eq!(star.status, SolveStatus::Infeasible);
        assert!(star.assignment.is_none());
        let c6 = brute_force(&build_domatic_feasibility(&GeometricGraph::cycle(6), 3).unwrap()).unwrap();
        assert_eq!(c6.status, SolveStatus::Optimal);
    }

    #[test]
    fn capacity_variants() {
        let star = GeometricGraph::star(4);
        let p2 = GeometricGraph::path(2);
        assert_eq!(brute_force(&build_fixed_k(&star, 3, 2).unwrap()).unwrap().status, SolveStatus::Optimal);
        let opt_k2 = build_soft_variant(&star, 3, Formulation::OptimalSoft, CapacityMode::FixedK { k: 2 }).unwrap();
        assert_eq!(objective(&opt_k2), Some(15.0));
        let all = build_soft_variant(&star, 3, Formulation::MaximalSoft, CapacityMode::FixedK { k: 3 }).unwrap();
        assert_eq!(objective(&all), Some(5.0));
        let costs =|m: Vec<f64>| CapacityMode::cost(CostVector::new(m).unwrap());
        let half = build_soft_variant(&p2, 3, Formulation::MaximalSoft, costs(vec![0.5, 0.5, 1.0])).unwrap();
        // {1,2} next to {3} completes both nodes
        assert_eq!(objective(&half), Some(2.0));
        let none = build_cost_based(&p2, 3, CostVector::new(vec![0.6, 0.7, 0.9]).unwrap()).unwrap();
        assert_eq!(brute_force(&none).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn cap_is_enforced() {
        let m = build_optimal_soft(&GeometricGraph::cycle(20), 3).unwrap();
        assert!(matches!(brute_force(&m), Err(Error::TooLargeForOracle { .. })));
    }
}
