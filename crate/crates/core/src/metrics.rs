//! Coverage error metrics, computed straight from an assignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GeometricGraph, NodeId};
use crate::model::PartitionAssignment;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageErrors {
    /// Total number of (node, mean) pairs where the mean is absent from `N[v]`.
    pub miss_cov: usize,
    /// Nodes missing at least one mean.
    pub inc_nodes: usize,
    pub per_node_missing: Vec<usize>,
}

pub fn coverage_errors(g: &GeometricGraph, assignment: &PartitionAssignment) -> Result<CoverageErrors> {
    let n = assignment.n;
    if assignment.node_count() != g.node_count() {
        return Err(Error::invalid(format!(
            "assignment covers {} nodes, graph has {}",
            assignment.node_count(),
            g.node_count()
        )));
    }
    if let Some((v, _)) = assignment.assign.iter().enumerate().find(|(_, s)| s.iter().any(|&i| i == 0 || i > n)) {
        return Err(Error::invalid(format!("node {v} holds a set index outside 1..={n}")));
    }
    let mut per_node_missing = Vec::with_capacity(g.node_count());
    for v in g.nodes() {
        let mut seen = vec![false; n + 1];
        for w in std::iter::once(v).chain(g.neighbours(v).iter().copied()) {
            for &i in &assignment.assign[w.0] {
                seen[i] = true;
            }
        }
        per_node_missing.push(n - seen[1..].iter().filter(|&&s| s).count());
    }
    Ok(CoverageErrors {
        miss_cov: per_node_missing.iter().sum(),
        inc_nodes: per_node_missing.iter().filter(|&&m| m > 0).count(),
        per_node_missing,
    })
}

impl CoverageErrors {
    pub fn missing(&self, v: NodeId) -> usize {
        self.per_node_missing[v.0]
    }
}

/// `(max_inc, max_miss)`: at most every node is incompletely covered, each
/// missing at most `n - 1` means since it always holds one itself.
pub fn error_bounds(g: &GeometricGraph, n: usize) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::invalid("partition size n must be at least 1"));
    }
    Ok((g.node_count(), (n - 1) * g.node_count()))
}
