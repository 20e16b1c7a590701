//! Solver-agnostic 0-1 programs for domatic and soft domatic partitions.
//!
//! Variables are laid out in blocks: all `x[v][i]` node-major, then the
//! `y[v][i]` block, then `z[v]`. Set indices are 1-based, nodes 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GeometricGraph, NodeId};

/// Two cost sums closer than this are treated as equal.
pub const COST_TOLERANCE: f64 = 1e-9;

/// Portfolios of multi-mean capacity rows are enumerated as subsets.
pub const MAX_SUBSET_SETS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formulation {
    /// Every set must dominate; no objective.
    #[serde(rename = "feasible")]
    Feasibility,
    /// Maximise the number of covered (node, set) pairs.
    #[serde(rename = "optimal")]
    OptimalSoft,
    /// Maximise the number of completely covered nodes.
    #[serde(rename = "maximal")]
    MaximalSoft,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Feasibility => "feasible",
            Formulation::OptimalSoft => "optimal",
            Formulation::MaximalSoft => "maximal",
        }
    }
}

/// Per-mean resource costs, each in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::invalid("cost vector is empty"));
        }
        if let Some(bad) = m.iter().find(|&&c| !(c > 0.0 && c <= 1.0)) {
            return Err(Error::invalid(format!("cost {bad} outside (0, 1]")));
        }
        Ok(CostVector(m))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Which node-capacity row a model carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CapacityMode {
    ExactlyOne,
    FixedK { k: usize },
    /// `Σ m_i x[v][i] = 1`, or `<= 1` when `relaxed`.
    Cost { costs: CostVector, relaxed: bool },
}

impl CapacityMode {
    pub fn cost(costs: CostVector) -> Self {
        CapacityMode::Cost { costs, relaxed: false }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if n > MAX_SUBSET_SETS && *self != CapacityMode::ExactlyOne {
            return Err(Error::invalid(format!("multi-mean capacity rows support at most {MAX_SUBSET_SETS} sets")));
        }
        match self {
            CapacityMode::ExactlyOne => Ok(()),
            CapacityMode::FixedK { k } if *k == 0 || *k > n => {
                Err(Error::invalid(format!("k = {k} must lie in 1..={n}")))
            }
            CapacityMode::FixedK { .. } => Ok(()),
            CapacityMode::Cost { costs, .. } if costs.len() != n => {
                Err(Error::invalid(format!("{} costs given for {n} sets", costs.len())))
            }
            CapacityMode::Cost { .. } => Ok(()),
        }
    }

    /// Ways a single node may hold means, as bitmasks over sets `1..=n`
    /// (bit `i - 1` is set `i`), in ascending mask order.
    pub fn portfolios(&self, n: usize) -> Vec<u64> {
        match self {
            CapacityMode::ExactlyOne => (0..n).map(|i| 1u64 << i).collect(),
            CapacityMode::FixedK { k } => (1u64..1 << n).filter(|m| m.count_ones() as usize == *k).collect(),
            CapacityMode::Cost { costs, relaxed } => (0u64..1 << n)
                .filter(|&m| {
                    let sum: f64 = (0..n).filter(|i| m >> i & 1 == 1).map(|i| costs.0[i]).sum();
                    if *relaxed {
                        sum <= 1.0 + COST_TOLERANCE
                    } else {
                        (sum - 1.0).abs() <= COST_TOLERANCE
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarRole {
    X { node: NodeId, set: usize },
    Y { node: NodeId, set: usize },
    Z { node: NodeId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + COST_TOLERANCE,
            Relation::Eq => (lhs - rhs).abs() <= COST_TOLERANCE,
            Relation::Ge => lhs >= rhs - COST_TOLERANCE,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowFamily {
    /// How many means node `v` holds.
    Capacity,
    /// Set `i` reaches `N[v]`.
    Coverage,
    /// `y[v][i]` may only be 1 when set `i` reaches `N[v]`.
    CoverLink,
    /// `z[v]` may only be 1 when every `y[v][i]` is.
    CompleteLink,
}

/// A linear row `Σ coef·var  rel  rhs`, terms referencing variable indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub family: RowFamily,
    pub node: NodeId,
    pub set: Option<usize>,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Always maximisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub terms: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub formulation: Formulation,
    pub capacity: CapacityMode,
    pub n: usize,
    pub node_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Option<Objective>,
    pub meta: ModelMeta,
}

impl IlpModel {
    /// Build from closed neighbourhoods (each containing its own node).
    pub fn from_neighbourhoods(
        neighbourhoods: &[Vec<NodeId>],
        n: usize,
        formulation: Formulation,
        capacity: CapacityMode,
    ) -> Result<Self> {
        let nodes = neighbourhoods.len();
        if n == 0 {
            return Err(Error::invalid("partition size n must be at least 1"));
        }
        if n > 64 {
            return Err(Error::invalid(format!("partition size {n} exceeds 64")));
        }
        if nodes == 0 {
            return Err(Error::invalid("graph has no nodes"));
        }
        capacity.validate(n)?;
        for (v, nb) in neighbourhoods.iter().enumerate() {
            if !nb.contains(&NodeId(v)) || nb.iter().any(|w| w.0 >= nodes) {
                return Err(Error::invalid(format!("malformed closed neighbourhood of node {v}")));
            }
        }

        let soft = formulation != Formulation::Feasibility;
        let x = |v: usize, i: usize| v * n + (i - 1);
        let y = |v: usize, i: usize| nodes * n + v * n + (i - 1);
        let z = |v: usize| 2 * nodes * n + v;

        let mut variables = Vec::new();
        for v in 0..nodes {
            for i in 1..=n {
                variables.push(Variable { name: format!("x_{v}_{i}"), role: VarRole::X { node: NodeId(v), set: i } });
            }
        }
        if soft {
            for v in 0..nodes {
                for i in 1..=n {
                    variables
                        .push(Variable { name: format!("y_{v}_{i}"), role: VarRole::Y { node: NodeId(v), set: i } });
                }
            }
        }
        if formulation == Formulation::MaximalSoft {
            for v in 0..nodes {
                variables.push(Variable { name: format!("z_{v}"), role: VarRole::Z { node: NodeId(v) } });
            }
        }

        let mut constraints = Vec::new();
        for v in 0..nodes {
            let (terms, relation, rhs) = match &capacity {
                CapacityMode::ExactlyOne => ((1..=n).map(|i| (x(v, i), 1.0)).collect(), Relation::Eq, 1.0),
                CapacityMode::FixedK { k } => ((1..=n).map(|i| (x(v, i), 1.0)).collect(), Relation::Eq, *k as f64),
                CapacityMode::Cost { costs, relaxed } => (
                    (1..=n).map(|i| (x(v, i), costs.0[i - 1])).collect(),
                    if *relaxed { Relation::Le } else { Relation::Eq },
                    1.0,
                ),
            };
            constraints.push(Constraint {
                name: format!("cap_{v}"),
                family: RowFamily::Capacity,
                node: NodeId(v),
                set: None,
                terms,
                relation,
                rhs,
            });
        }
        for (v, nb) in neighbourhoods.iter().enumerate() {
            let mut nb = nb.clone();
            nb.sort_unstable();
            for i in 1..=n {
                let reach = nb.iter().map(|w| (x(w.0, i), 1.0));
                let row = if soft {
                    Constraint {
                        name: format!("cov_{v}_{i}"),
                        family: RowFamily::CoverLink,
                        node: NodeId(v),
                        set: Some(i),
                        terms: std::iter::once((y(v, i), 1.0)).chain(reach.map(|(t, _)| (t, -1.0))).collect(),
                        relation: Relation::Le,
                        rhs: 0.0,
                    }
                } else {
                    Constraint {
                        name: format!("cov_{v}_{i}"),
                        family: RowFamily::Coverage,
                        node: NodeId(v),
                        set: Some(i),
                        terms: reach.collect(),
                        relation: Relation::Ge,
                        rhs: 1.0,
                    }
                };
                constraints.push(row);
            }
        }
        if formulation == Formulation::MaximalSoft {
            for v in 0..nodes {
                for i in 1..=n {
                    constraints.push(Constraint {
                        name: format!("comp_{v}_{i}"),
                        family: RowFamily::CompleteLink,
                        node: NodeId(v),
                        set: Some(i),
                        terms: vec![(z(v), 1.0), (y(v, i), -1.0)],
                        relation: Relation::Le,
                        rhs: 0.0,
                    });
                }
            }
        }

        let objective = match formulation {
            Formulation::Feasibility => None,
            Formulation::OptimalSoft => Some(Objective { terms: (0..nodes * n).map(|j| (nodes * n + j, 1.0)).collect() }),
            Formulation::MaximalSoft => Some(Objective { terms: (0..nodes).map(|v| (z(v), 1.0)).collect() }),
        };

        Ok(IlpModel { variables, constraints, objective, meta: ModelMeta { formulation, capacity, n, node_count: nodes } })
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn node_count(&self) -> usize {
        self.meta.node_count
    }

    pub fn formulation(&self) -> Formulation {
        self.meta.formulation
    }

    /// Index of `x[v][i]`.
    pub fn x_index(&self, v: NodeId, set: usize) -> usize {
        v.0 * self.meta.n + (set - 1)
    }

    /// Closed neighbourhoods as recorded in the coverage rows of set 1.
    pub fn neighbourhoods(&self) -> Result<Vec<Vec<NodeId>>> {
        let mut out = vec![Vec::new(); self.meta.node_count];
        for row in &self.constraints {
            if !matches!(row.family, RowFamily::Coverage | RowFamily::CoverLink) || row.set != Some(1) {
                continue;
            }
            let slot = out
                .get_mut(row.node.0)
                .ok_or_else(|| Error::UnsupportedModel(format!("row {} names a missing node", row.name)))?;
            for &(var, _) in &row.terms {
                if let Some(Variable { role: VarRole::X { node, .. }, .. }) = self.variables.get(var) {
                    slot.push(*node);
                } else if var >= self.variables.len() {
                    return Err(Error::UnsupportedModel(format!("row {} references variable {var}", row.name)));
                }
            }
        }
        Ok(out)
    }

    /// Reject models that are not exactly what the builders produce; the
    /// solvers rely on that structure.
    pub fn validate_structure(&self) -> Result<Vec<Vec<NodeId>>> {
        let nb = self.neighbourhoods()?;
        let rebuilt =
            IlpModel::from_neighbourhoods(&nb, self.meta.n, self.meta.formulation, self.meta.capacity.clone())
                .map_err(|e| Error::UnsupportedModel(e.to_string()))?;
        if rebuilt != *self {
            return Err(Error::UnsupportedModel("model does not match any supported formulation".into()));
        }
        Ok(nb)
    }

    /// Largest objective any solution can reach, ignoring coverage.
    pub fn objective_ceiling(&self) -> f64 {
        self.objective.as_ref().map_or(0.0, |o| o.terms.iter().map(|t| t.1.max(0.0)).sum())
    }
}

pub fn build_model(
    g: &GeometricGraph,
    n: usize,
    formulation: Formulation,
    capacity: CapacityMode,
) -> Result<IlpModel> {
    IlpModel::from_neighbourhoods(&g.closed_neighbourhoods(), n, formulation, capacity)
}

pub fn build_domatic_feasibility(g: &GeometricGraph, n: usize) -> Result<IlpModel> {
    build_model(g, n, Formulation::Feasibility, CapacityMode::ExactlyOne)
}

pub fn build_fixed_k(g: &GeometricGraph, n: usize, k: usize) -> Result<IlpModel> {
    build_model(g, n, Formulation::Feasibility, CapacityMode::FixedK { k })
}

pub fn build_cost_based(g: &GeometricGraph, n: usize, costs: CostVector) -> Result<IlpModel> {
    build_model(g, n, Formulation::Feasibility, CapacityMode::cost(costs))
}

pub fn build_optimal_soft(g: &GeometricGraph, n: usize) -> Result<IlpModel> {
    build_model(g, n, Formulation::OptimalSoft, CapacityMode::ExactlyOne)
}

pub fn build_maximal_soft(g: &GeometricGraph, n: usize) -> Result<IlpModel> {
    build_model(g, n, Formulation::MaximalSoft, CapacityMode::ExactlyOne)
}

/// A soft objective over a non-default capacity row. `base` must be one of
/// the two soft formulations.
pub fn build_soft_variant(
    g: &GeometricGraph,
    n: usize,
    base: Formulation,
    capacity: CapacityMode,
) -> Result<IlpModel> {
    if base == Formulation::Feasibility {
        return Err(Error::invalid("soft variants need an optimal or maximal base"));
    }
    build_model(g, n, base, capacity)
}

/// Which means each node holds: sorted, 1-based set indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    pub n: usize,
    pub assign: Vec<Vec<usize>>,
}

impl PartitionAssignment {
    pub fn new(n: usize, assign: Vec<Vec<usize>>) -> Result<Self> {
        let mut assign = assign;
        for (v, sets) in assign.iter_mut().enumerate() {
            sets.sort_unstable();
            sets.dedup();
            if sets.iter().any(|&i| i == 0 || i > n) {
                return Err(Error::invalid(format!("node {v} holds a set index outside 1..={n}")));
            }
        }
        Ok(PartitionAssignment { n, assign })
    }

    /// One set per node.
    pub fn from_labels(n: usize, labels: &[usize]) -> Result<Self> {
        Self::new(n, labels.iter().map(|&i| vec![i]).collect())
    }

    pub fn from_masks(n: usize, masks: &[u64]) -> Self {
        let assign = masks.iter().map(|&m| (1..=n).filter(|i| m >> (i - 1) & 1 == 1).collect()).collect();
        PartitionAssignment { n, assign }
    }

    pub fn masks(&self) -> Vec<u64> {
        self.assign.iter().map(|sets| sets.iter().fold(0u64, |m, &i| m | 1 << (i - 1))).collect()
    }

    pub fn node_count(&self) -> usize {
        self.assign.len()
    }

    pub fn holds(&self, v: NodeId, set: usize) -> bool {
        self.assign[v.0].binary_search(&set).is_ok()
    }

    /// Whether every node's portfolio satisfies `capacity`.
    pub fn respects(&self, capacity: &CapacityMode) -> bool {
        let allowed = capacity.portfolios(self.n);
        self.masks().iter().all(|m| allowed.contains(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(m: &IlpModel) -> (usize, usize) {
        (m.variables.len(), m.constraints.len())
    }

    #[test]
    fn counts_follow_construction() {
        let g = GeometricGraph::complete(3);
        assert_eq!(sizes(&build_domatic_feasibility(&g, 2).unwrap()), (6, 3 + 6));
        assert_eq!(sizes(&build_optimal_soft(&g, 2).unwrap()), (12, 3 + 6));
        assert_eq!(sizes(&build_maximal_soft(&g, 2).unwrap()), (15, 3 + 6 + 6));
        let c = GeometricGraph::cycle(7);
        let m = build_maximal_soft(&c, 4).unwrap();
        assert_eq!(sizes(&m), (7 * 4 * 2 + 7, 7 + 7 * 4 + 7 * 4));
        assert_eq!(m.objective.unwrap().terms.len(), 7);
    }

    #[test]
    fn every_variable_is_used() {
        let g = GeometricGraph::star(4);
        for f in [Formulation::Feasibility, Formulation::OptimalSoft, Formulation::MaximalSoft] {
            let m = build_model(&g, 3, f, CapacityMode::ExactlyOne).unwrap();
            let mut used = vec![false; m.variables.len()];
            for row in &m.constraints {
                for &(j, c) in &row.terms {
                    assert!(c.is_finite());
                    used[j] = true;
                }
            }
            if let Some(o) = &m.objective {
                o.terms.iter().for_each(|&(j, _)| used[j] = true);
            }
            assert!(used.iter().all(|&u| u));
        }
    }

    #[test]
    fn capacity_rows() {
        let g = GeometricGraph::path(2);
        let m = build_fixed_k(&g, 3, 2).unwrap();
        assert_eq!(m.constraints[0].rhs, 2.0);
        assert!(build_fixed_k(&g, 3, 0).is_err());
        assert!(build_fixed_k(&g, 3, 4).is_err());
        let costs = CostVector::new(vec![0.5, 0.5, 1.0]).unwrap();
        let m = build_cost_based(&g, 3, costs.clone()).unwrap();
        assert_eq!(m.constraints[1].terms, vec![(3, 0.5), (4, 0.5), (5, 1.0)]);
        assert!(build_cost_based(&g, 2, costs).is_err());
        assert!(CostVector::new(vec![0.0, 1.0]).is_err());
        assert!(CostVector::new(vec![1.5]).is_err());
        assert!(build_optimal_soft(&g, 0).is_err());
        assert!(build_soft_variant(&g, 3, Formulation::Feasibility, CapacityMode::ExactlyOne).is_err());
    }

    #[test]
    fn portfolio_enumeration() {
        assert_eq!(CapacityMode::ExactlyOne.portfolios(3), vec![1, 2, 4]);
        assert_eq!(CapacityMode::FixedK { k: 2 }.portfolios(3), vec![3, 5, 6]);
        let c = |m: Vec<f64>| CapacityMode::cost(CostVector::new(m).unwrap());
        assert_eq!(c(vec![1.0, 1.0, 1.0]).portfolios(3), vec![1, 2, 4]);
        assert_eq!(c(vec![0.5, 0.5, 1.0]).portfolios(3), vec![3, 4]);
        assert!(c(vec![0.6, 0.7, 0.9]).portfolios(3).is_empty());
        // 0.1 + 0.2 + 0.7 is not exactly 1 in binary floating point
        assert_eq!(c(vec![0.1, 0.2, 0.7]).portfolios(3), vec![7]);
        let relaxed = CapacityMode::Cost { costs: CostVector::new(vec![0.6, 0.7, 0.9]).unwrap(), relaxed: true };
        assert_eq!(relaxed.portfolios(3), vec![0, 1, 2, 4]);
    }

    #[test]
    fn structure_round_trip() {
        let g = GeometricGraph::cycle(6);
        let m = build_maximal_soft(&g, 3).unwrap();
        assert_eq!(m.validate_structure().unwrap(), g.closed_neighbourhoods());
        let mut broken = m.clone();
        broken.constraints[3].rhs = 2.0;
        assert!(matches!(broken.validate_structure(), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn assignment_masks() {
        let a = PartitionAssignment::new(3, vec![vec![3, 1], vec![2]]).unwrap();
        assert_eq!(a.masks(), vec![5, 2]);
        assert_eq!(PartitionAssignment::from_masks(3, &[5, 2]), a);
        assert!(a.holds(NodeId(0), 3));
        assert!(PartitionAssignment::new(3, vec![vec![4]]).is_err());
        assert!(!a.respects(&CapacityMode::ExactlyOne));
        assert!(PartitionAssignment::from_labels(3, &[1, 2]).unwrap().respects(&CapacityMode::ExactlyOne));
    }
}
