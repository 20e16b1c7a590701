//! Immutable geometric graphs on the unit square and the structural queries
//! the generator, the adaptation passes and the partition models run on them.
//!
//! A [`GeometricGraph`] never changes after construction. Every adaptation
//! returns a fresh value, so components and bridges computed for one value
//! stay valid for as long as that value lives.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `[0, |V|)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn in_unit_square(self) -> bool {
        (0.0..1.0).contains(&self.x) && (0.0..1.0).contains(&self.y)
    }
}

/// Euclidean distance. Every distance comparison in the crate goes through
/// this function so that placement and edge construction agree bit for bit.
#[inline]
pub fn distance(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Where an edge came from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeTag {
    /// Present because the endpoints are within transmission range.
    #[default]
    Udg,
    /// Added to join two connected components.
    Joined,
    /// Added to eliminate a bridge or bridge path.
    Debridged,
}

/// Undirected edge, stored with `u < v`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub tag: EdgeTag,
}

impl Edge {
    pub fn ends(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DegreeStats {
    pub avg_degree: f64,
    pub degree_variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricGraph {
    positions: Vec<Point>,
    adjacency: Vec<Vec<NodeId>>,
    edges: Vec<Edge>,
    r_tr: f64,
    lambda: f64,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl GeometricGraph {
    /// Unit disk graph over `positions`: `{v, w}` is an edge iff
    /// `distance(v, w) <= r_tr`.
    pub fn build_udg(positions: Vec<Point>, r_tr: f64) -> Result<Self> {
        Self::build_lambda_udg(positions, r_tr, 0.0)
    }

    /// Like [`build_udg`](Self::build_udg) but records `lambda` and checks
    /// that every pair of nodes is at least `lambda` apart.
    pub fn build_lambda_udg(positions: Vec<Point>, r_tr: f64, lambda: f64) -> Result<Self> {
        if !(r_tr > 0.0 && r_tr.is_finite()) {
            return Err(Error::invalid(format!("r_tr must be positive, got {r_tr}")));
        }
        validate_layout(&positions, r_tr, lambda)?;
        let mut pairs = Vec::new();
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if distance(positions[i], positions[j]) <= r_tr {
                    pairs.push((i, j, EdgeTag::Udg));
                }
            }
        }
        Ok(Self::assemble(positions, pairs, r_tr, lambda))
    }

    /// Graph with an explicit edge list. Used for deserialisation, fixtures and
    /// the adaptation passes.
    pub fn from_parts(
        positions: Vec<Point>,
        edges: impl IntoIterator<Item = (usize, usize, EdgeTag)>,
        r_tr: f64,
        lambda: f64,
    ) -> Result<Self> {
        if !(r_tr >= 0.0 && r_tr.is_finite()) {
            return Err(Error::invalid(format!("r_tr must be finite and non-negative, got {r_tr}")));
        }
        validate_layout(&positions, r_tr, lambda)?;
        let n = positions.len();
        let mut pairs: Vec<(usize, usize, EdgeTag)> = Vec::new();
        for (a, b, tag) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge {{{a}, {b}}} references a missing node")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at node {a}")));
            }
            let (u, v) = ordered(a, b);
            pairs.push((u, v, tag));
        }
        pairs.sort_by_key(|&(u, v, _)| (u, v));
        if pairs.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::invalid("duplicate edge"));
        }
        Ok(Self::assemble(positions, pairs, r_tr, lambda))
    }

    /// Abstract topology for tests and fixtures: nodes evenly spaced on a
    /// circle inside the unit square, edges as given.
    pub fn from_edge_list(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let positions = (0..node_count)
            .map(|k| {
                let angle = std::f64::consts::TAU * k as f64 / node_count.max(1) as f64;
                Point::new(0.5 + 0.4 * angle.cos(), 0.5 + 0.4 * angle.sin())
            })
            .collect();
        Self::from_parts(positions, edges.iter().map(|&(a, b)| (a, b, EdgeTag::Udg)), 1.0, 0.0)
    }

    pub fn complete(m: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                edges.push((i, j));
            }
        }
        Self::from_edge_list(m, &edges).expect("complete graph is well formed")
    }

    pub fn cycle(m: usize) -> Self {
        assert!(m >= 3, "cycle needs at least 3 nodes");
        let edges: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        Self::from_edge_list(m, &edges).expect("cycle is well formed")
    }

    pub fn path(m: usize) -> Self {
        let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        Self::from_edge_list(m, &edges).expect("path is well formed")
    }

    /// Star `K_{1,leaves}` with the centre at node 0.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Self::from_edge_list(leaves + 1, &edges).expect("star is well formed")
    }

    fn assemble(positions: Vec<Point>, pairs: Vec<(usize, usize, EdgeTag)>, r_tr: f64, lambda: f64) -> Self {
        let mut adjacency = vec![Vec::new(); positions.len()];
        let mut edges = Vec::with_capacity(pairs.len());
        for (u, v, tag) in pairs {
            adjacency[u].push(NodeId(v));
            adjacency[v].push(NodeId(u));
            edges.push(Edge { u: NodeId(u), v: NodeId(v), tag });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        edges.sort_by_key(|e| (e.u, e.v));
        GeometricGraph { positions, adjacency, edges, r_tr, lambda }
    }

    /// New graph with extra edges. Pairs that already exist are ignored.
    pub fn with_added_edges(&self, extra: &[(NodeId, NodeId, EdgeTag)]) -> Self {
        let mut pairs: Vec<_> = self.edges.iter().map(|e| (e.u.0, e.v.0, e.tag)).collect();
        for &(a, b, tag) in extra {
            let (u, v) = ordered(a.0, b.0);
            if u != v && v < self.positions.len() {
                pairs.push((u, v, tag));
            }
        }
        // stable sort keeps the existing edge (and its tag) ahead of a duplicate
        pairs.sort_by_key(|&(u, v, _)| (u, v));
        pairs.dedup_by_key(|p| (p.0, p.1));
        Self::assemble(self.positions.clone(), pairs, self.r_tr, self.lambda)
    }

    /// New graph without the given edges.
    pub fn without_edges(&self, removed: &[(NodeId, NodeId)]) -> Self {
        let drop: std::collections::HashSet<(usize, usize)> =
            removed.iter().map(|&(a, b)| ordered(a.0, b.0)).collect();
        let pairs = self
            .edges
            .iter()
            .filter(|e| !drop.contains(&(e.u.0, e.v.0)))
            .map(|e| (e.u.0, e.v.0, e.tag))
            .collect();
        Self::assemble(self.positions.clone(), pairs, self.r_tr, self.lambda)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.positions.len()).map(NodeId)
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, v: NodeId) -> Point {
        self.positions[v.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn r_tr(&self) -> f64 {
        self.r_tr
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if v.0 < self.positions.len() {
            Ok(())
        } else {
            Err(Error::InvalidNode(v))
        }
    }

    /// Sorted adjacent nodes. Panics on an out-of-range id.
    pub fn neighbours(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.0]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a.0 < self.adjacency.len() && self.adjacency[a.0].binary_search(&b).is_ok()
    }

    pub fn node_distance(&self, a: NodeId, b: NodeId) -> f64 {
        distance(self.positions[a.0], self.positions[b.0])
    }

    pub fn edge_length(&self, e: &Edge) -> f64 {
        self.node_distance(e.u, e.v)
    }

    /// `N[v]`: the adjacent nodes of `v` plus `v`, sorted.
    pub fn closed_neighbourhood(&self, v: NodeId) -> Result<Vec<NodeId>> {
        self.check(v)?;
        let mut out = self.adjacency[v.0].clone();
        let at = out.binary_search(&v).unwrap_err();
        out.insert(at, v);
        Ok(out)
    }

    /// All closed neighbourhoods, indexed by node.
    pub fn closed_neighbourhoods(&self) -> Vec<Vec<NodeId>> {
        self.nodes().map(|v| self.closed_neighbourhood(v).expect("node in range")).collect()
    }

    pub fn avg_degree(&self) -> f64 {
        if self.positions.is_empty() {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.positions.len() as f64
        }
    }

    /// Mean and population variance of the degree sequence.
    pub fn degree_stats(&self) -> Result<DegreeStats> {
        let n = self.positions.len();
        if n == 0 {
            return Err(Error::invalid("degree statistics of an empty graph"));
        }
        let sum: usize = self.adjacency.iter().map(Vec::len).sum();
        let avg = sum as f64 / n as f64;
        let var = self
            .adjacency
            .iter()
            .map(|a| {
                let d = a.len() as f64 - avg;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        Ok(DegreeStats { avg_degree: avg, degree_variance: var })
    }

    /// Fraction of realised edges among the neighbours of `v`; 0 when `v`
    /// has fewer than two neighbours.
    pub fn local_cluster_coefficient(&self, v: NodeId) -> Result<f64> {
        self.check(v)?;
        let nb = &self.adjacency[v.0];
        let d = nb.len();
        if d < 2 {
            return Ok(0.0);
        }
        let mut links = 0usize;
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if self.has_edge(a, b) {
                    links += 1;
                }
            }
        }
        Ok(2.0 * links as f64 / (d * (d - 1)) as f64)
    }

    /// Population variance of the local cluster coefficients.
    pub fn cluster_coefficient_variance(&self) -> Result<f64> {
        let n = self.positions.len();
        if n == 0 {
            return Err(Error::invalid("cluster coefficient variance of an empty graph"));
        }
        let cs: Vec<f64> = self.nodes().map(|v| self.local_cluster_coefficient(v).unwrap()).collect();
        let mean = cs.iter().sum::<f64>() / n as f64;
        Ok(cs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n as f64)
    }

    /// Component label per node; labels are dense and ordered by smallest member.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.positions.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if label[w.0] == usize::MAX {
                        label[w.0] = count;
                        queue.push_back(w.0);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Node sets of the maximal connected subgraphs, each sorted, ordered by
    /// smallest member.
    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        let (label, count) = self.component_labels();
        let mut out = vec![Vec::new(); count];
        for (v, &l) in label.iter().enumerate() {
            out[l].push(NodeId(v));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        !self.positions.is_empty() && self.component_labels().1 == 1
    }

    /// Cut edges, as `(u, v)` with `u < v`, sorted. Iterative low-link DFS,
    /// linear in `|V| + |E|`.
    pub fn bridges(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.positions.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut out = Vec::new();
        let mut time = 0;
        // (node, parent, next neighbour index)
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();
        for s in 0..n {
            if disc[s] != usize::MAX {
                continue;
            }
            disc[s] = time;
            low[s] = time;
            time += 1;
            stack.push((s, usize::MAX, 0));
            while let Some(&mut (u, parent, ref mut next)) = stack.last_mut() {
                if *next < self.adjacency[u].len() {
                    let w = self.adjacency[u][*next].0;
                    *next += 1;
                    if w == parent {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = time;
                        low[w] = time;
                        time += 1;
                        stack.push((w, u, 0));
                    } else {
                        low[u] = low[u].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[u]);
                        if low[u] > disc[parent] {
                            let (a, b) = ordered(parent, u);
                            out.push((NodeId(a), NodeId(b)));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Label per node of the 2-edge-connected component it belongs to, i.e.
    /// the components left after deleting every bridge.
    pub fn bridge_connected_labels(&self) -> (Vec<usize>, usize) {
        self.without_edges(&self.bridges()).component_labels()
    }

    /// Maximal chains of at least two bridges whose interior nodes all have
    /// degree two. Each chain is oriented so that its smaller endpoint comes
    /// first; chains are ordered by first node.
    pub fn bridge_paths(&self) -> Vec<Vec<NodeId>> {
        let bridges = self.bridges();
        let is_bridge = |a: usize, b: usize| bridges.binary_search(&{
            let (u, v) = ordered(a, b);
            (NodeId(u), NodeId(v))
        }).is_ok();
        let mut used = vec![false; bridges.len()];
        let index_of = |a: usize, b: usize| {
            let (u, v) = ordered(a, b);
            bridges.binary_search(&(NodeId(u), NodeId(v))).unwrap()
        };
        let mut paths = Vec::new();
        for start in 0..bridges.len() {
            if used[start] {
                continue;
            }
            used[start] = true;
            let (a, b) = (bridges[start].0 .0, bridges[start].1 .0);
            // Walk outward from each end through degree-two interior nodes.
            let extend = |from: usize, mut at: usize, used: &mut Vec<bool>| {
                let mut chain = vec![at];
                let mut prev = from;
                while self.adjacency[at].len() == 2 {
                    let next = self.adjacency[at].iter().map(|w| w.0).find(|&w| w != prev).unwrap();
                    if !is_bridge(at, next) {
                        break;
                    }
                    let ix = index_of(at, next);
                    if used[ix] {
                        break;
                    }
                    used[ix] = true;
                    chain.push(next);
                    prev = at;
                    at = next;
                }
                chain
            };
            let left = extend(b, a, &mut used);
            let right = extend(a, b, &mut used);
            let mut path: Vec<NodeId> = left.into_iter().rev().chain(right).map(NodeId).collect();
            if path.len() >= 3 {
                if path.first() > path.last() {
                    path.reverse();
                }
                paths.push(path);
            }
        }
        paths.sort();
        paths
    }

    /// Smallest pairwise node distance, `None` below two nodes.
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        min_pairwise(&self.positions)
    }
}

fn min_pairwise(points: &[Point]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = distance(points[i], points[j]);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best
}

fn validate_layout(positions: &[Point], r_tr: f64, lambda: f64) -> Result<()> {
    if let Some(p) = positions.iter().find(|p| !p.in_unit_square()) {
        return Err(Error::invalid(format!("point ({}, {}) lies outside [0,1)^2", p.x, p.y)));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be finite and non-negative, got {lambda}")));
    }
    if lambda > 0.0 && r_tr > 0.0 && lambda >= r_tr {
        return Err(Error::invalid(format!("lambda {lambda} must be below r_tr {r_tr}")));
    }
    if let Some(d) = min_pairwise(positions) {
        if d == 0.0 {
            return Err(Error::invalid("duplicate coordinates"));
        }
        if d < lambda {
            return Err(Error::invalid(format!("nodes {d} apart violate lambda {lambda}")));
        }
    }
    Ok(())
}
