//! Row-by-row validation of a solution against a model.
//!
//! Works purely from the linear rows, so it shares nothing with the
//! combinatorial search and can vouch for its output.

use crate::error::{Error, Result};
use crate::model::{IlpModel, PartitionAssignment, RowFamily, VarRole};

fn row_value(terms: &[(usize, f64)], values: &[f64]) -> f64 {
    terms.iter().map(|&(j, c)| c * values[j]).sum()
}

/// Extend an assignment to a full variable vector, raising every `y` and
/// `z` to the largest value its rows permit.
pub fn complete_solution(model: &IlpModel, assignment: &PartitionAssignment) -> Result<Vec<f64>> {
    if assignment.n != model.meta.n || assignment.node_count() != model.meta.node_count {
        return Err(Error::invalid(format!(
            "assignment for {} nodes and n = {} does not fit a model with {} nodes and n = {}",
            assignment.node_count(),
            assignment.n,
            model.meta.node_count,
            model.meta.n
        )));
    }
    let mut values: Vec<f64> = model
        .variables
        .iter()
        .map(|var| match var.role {
            VarRole::X { node, set } => {
                if assignment.holds(node, set) {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 1.0,
        })
        .collect();
    // y rows only read x; z rows only read y
    for family in [RowFamily::CoverLink, RowFamily::CompleteLink] {
        for row in model.constraints.iter().filter(|r| r.family == family) {
            if !row.relation.holds(row_value(&row.terms, &values), row.rhs) {
                for &(j, c) in &row.terms {
                    if c > 0.0 {
                        values[j] = 0.0;
                    }
                }
            }
        }
    }
    Ok(values)
}

/// Names of every row the vector violates.
pub fn violated_rows(model: &IlpModel, values: &[f64]) -> Vec<String> {
    model
        .constraints
        .iter()
        .filter(|row| !row.relation.holds(row_value(&row.terms, values), row.rhs))
        .map(|row| row.name.clone())
        .collect()
}

pub fn objective_value(model: &IlpModel, values: &[f64]) -> f64 {
    model.objective.as_ref().map_or(0.0, |o| row_value(&o.terms, values))
}

/// Objective reached by `assignment`, or an error naming violated rows.
pub fn verify(model: &IlpModel, assignment: &PartitionAssignment) -> Result<f64> {
    let values = complete_solution(model, assignment)?;
    let bad = violated_rows(model, &values);
    if bad.is_empty() {
        Ok(objective_value(model, &values))
    } else {
        let shown: Vec<_> = bad.iter().take(5).map(String::as_str).collect();
        Err(Error::invalid(format!("{} violated rows: {}", bad.len(), shown.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeometricGraph;
    use crate::model::*;

    #[test]
    fn c6_repeating_pattern_is_domatic() {
        let g = GeometricGraph::cycle(6);
        let m = build_domatic_feasibility(&g, 3).unwrap();
        let a = PartitionAssignment::from_labels(3, &[1, 2, 3, 1, 2, 3]).unwrap();
        assert_eq!(verify(&m, &a).unwrap(), 0.0);
        let bad = PartitionAssignment::from_labels(3, &[1, 1, 2, 3, 2, 3]).unwrap();
        assert!(verify(&m, &bad).is_err());
    }

    #[test]
    fn soft_values_are_maximal() {
        let g = GeometricGraph::path(2);
        let a = PartitionAssignment::from_labels(3, &[1, 2]).unwrap();
        assert_eq!(verify(&build_optimal_soft(&g, 3).unwrap(), &a).unwrap(), 4.0);
        assert_eq!(verify(&build_maximal_soft(&g, 3).unwrap(), &a).unwrap(), 0.0);
        let k3 = GeometricGraph::complete(3);
        let a = PartitionAssignment::from_labels(3, &[3, 1, 2]).unwrap();
        assert_eq!(verify(&build_optimal_soft(&k3, 3).unwrap(), &a).unwrap(), 9.0);
        assert_eq!(verify(&build_maximal_soft(&k3, 3).unwrap(), &a).unwrap(), 3.0);
    }

    #[test]
    fn capacity_is_checked() {
        let g = GeometricGraph::path(2);
        let m = build_optimal_soft(&g, 3).unwrap();
        let two = PartitionAssignment::new(3, vec![vec![1, 2], vec![3]]).unwrap();
        assert!(verify(&m, &two).is_err());
        let wrong_size = PartitionAssignment::from_labels(2, &[1, 2]).unwrap();
        assert!(verify(&m, &wrong_size).is_err());
    }
}
