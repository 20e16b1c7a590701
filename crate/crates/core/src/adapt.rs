//! Post-processing passes that turn generated graphs into connected,
//! bridge-free, degree-targeted network models. Node positions never move;
//! only the edge set changes, and added edges carry a provenance tag.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeTag, GeometricGraph, NodeId};

fn key(g: &GeometricGraph, a: NodeId, b: NodeId) -> (f64, NodeId, NodeId) {
    let (u, v) = if a < b { (a, b) } else { (b, a) };
    (g.node_distance(u, v), u, v)
}

fn shorter(x: (f64, NodeId, NodeId), y: (f64, NodeId, NodeId)) -> bool {
    x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))).is_lt()
}

/// Closest pair between two node sets, ties broken by endpoint order.
fn nearest_pair(g: &GeometricGraph, left: &[NodeId], right: &[NodeId]) -> Option<(f64, NodeId, NodeId)> {
    let mut best = None;
    for &a in left {
        for &b in right {
            if a == b {
                continue;
            }
            let k = key(g, a, b);
            if best.is_none_or(|cur| shorter(k, cur)) {
                best = Some(k);
            }
        }
    }
    best
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Join all components: take the nearest node pair between every two
/// components, then repeatedly add the shortest remaining pair whose
/// endpoints still lie in different components. Added edges are tagged
/// [`EdgeTag::Joined`] and may be longer than `r_tr`.
pub fn connect_components(g: &GeometricGraph) -> GeometricGraph {
    let comps = g.connected_components();
    if comps.len() <= 1 {
        return g.clone();
    }
    let mut candidates = Vec::new();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            if let Some(k) = nearest_pair(g, &comps[i], &comps[j]) {
                candidates.push((k, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0 .0.total_cmp(&y.0 .0).then((x.0 .1, x.0 .2).cmp(&(y.0 .1, y.0 .2))));
    let mut sets = DisjointSets::new(comps.len());
    let mut added = Vec::new();
    for ((_, a, b), i, j) in candidates {
        if sets.union(i, j) {
            added.push((a, b, EdgeTag::Joined));
        }
    }
    g.with_added_edges(&added)
}

/// For every bridge path `v_0, ..., v_k` add the chords `{v_j, v_{j+2}}` for
/// `j = 0..=k-2`, which puts every edge of the path on a triangle.
pub fn eliminate_bridge_paths(g: &GeometricGraph) -> GeometricGraph {
    let mut added = Vec::new();
    for path in g.bridge_paths() {
        for w in path.windows(3) {
            added.push((w[0], w[2], EdgeTag::Debridged));
        }
    }
    if added.is_empty() {
        g.clone()
    } else {
        g.with_added_edges(&added)
    }
}

/// Nodes reachable from `start` without crossing the edge `{start, other}`.
fn side_of(g: &GeometricGraph, start: NodeId, other: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; g.node_count()];
    seen[start.0] = true;
    let mut stack = vec![start];
    let mut out = vec![];
    while let Some(x) = stack.pop() {
        out.push(x);
        for &w in g.neighbours(x) {
            if (x == start && w == other) || seen[w.0] {
                continue;
            }
            seen[w.0] = true;
            stack.push(w);
        }
    }
    out.sort_unstable();
    out
}

/// The edge that removes bridge `{u, v}`: the shortest link between the two
/// bridge-connected components it joins, avoiding both bridge endpoints.
/// When one component is the bare endpoint, that endpoint itself is linked
/// into the other component; when both are, the whole sides are searched.
fn bridge_cover(g: &GeometricGraph, labels: &[usize], u: NodeId, v: NodeId) -> Result<(NodeId, NodeId)> {
    let block = |end: NodeId| -> Vec<NodeId> {
        g.nodes().filter(|&x| x != end && labels[x.0] == labels[end.0]).collect()
    };
    let (a, b) = (block(u), block(v));
    let pick = match (a.is_empty(), b.is_empty()) {
        (false, false) => nearest_pair(g, &a, &b),
        (true, false) => nearest_pair(g, &[u], &b),
        (false, true) => nearest_pair(g, &a, &[v]),
        (true, true) => {
            let (su, sv) = (side_of(g, u, v), side_of(g, v, u));
            let mut best = None;
            for &x in &su {
                for &y in &sv {
                    if (x, y) == (u, v) || (x, y) == (v, u) {
                        continue;
                    }
                    let k = key(g, x, y);
                    if best.is_none_or(|cur| shorter(k, cur)) {
                        best = Some(k);
                    }
                }
            }
            best
        }
    };
    pick.map(|(_, x, y)| (x, y)).ok_or(Error::IrreducibleBridge { u: u.0, v: v.0 })
}

/// Remove every bridge by adding edges: bridge paths first, then one
/// bridge at a time, recomputing the bridge set after each insertion.
pub fn eliminate_bridges(g: &GeometricGraph) -> Result<GeometricGraph> {
    let mut cur = eliminate_bridge_paths(g);
    loop {
        let bridges = cur.bridges();
        let Some(&(u, v)) = bridges.first() else {
            return Ok(cur);
        };
        let (labels, _) = cur.bridge_connected_labels();
        let (x, y) = bridge_cover(&cur, &labels, u, v)?;
        cur = cur.with_added_edges(&[(x, y, EdgeTag::Debridged)]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ThinningMode {
    LongestFirst,
    /// Removal probability proportional to `length^exponent`.
    LengthWeightedRandom { exponent: f64 },
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinningStrategy {
    pub mode: ThinningMode,
    pub forbid_disconnect: bool,
    pub forbid_new_bridges: bool,
}

impl ThinningStrategy {
    /// Squared-length weighting that never disconnects.
    pub fn squared_length() -> Self {
        ThinningStrategy {
            mode: ThinningMode::LengthWeightedRandom { exponent: 2.0 },
            forbid_disconnect: true,
            forbid_new_bridges: false,
        }
    }

    pub fn forbidding_new_bridges(mut self) -> Self {
        self.forbid_new_bridges = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThinOutcome {
    pub graph: GeometricGraph,
    pub removed: usize,
    pub reached: bool,
}

fn removal_keeps_bridges(g: &GeometricGraph, e: (NodeId, NodeId), bridges: &[(NodeId, NodeId)]) -> bool {
    if bridges.binary_search(&e).is_ok() {
        // deleting a bridge destroys no cycle
        return true;
    }
    g.without_edges(&[e]).bridges().iter().all(|b| bridges.binary_search(b).is_ok())
}

/// Remove edges one at a time until the average degree drops to
/// `deg_target` or no eligible edge remains.
pub fn thin_edges<R: Rng + ?Sized>(
    g: &GeometricGraph,
    deg_target: f64,
    strategy: &ThinningStrategy,
    rng: &mut R,
) -> Result<ThinOutcome> {
    if !(deg_target >= 0.0) {
        return Err(Error::invalid(format!("degree target must be non-negative, got {deg_target}")));
    }
    if let ThinningMode::LengthWeightedRandom { exponent } = strategy.mode {
        if !exponent.is_finite() {
            return Err(Error::invalid("thinning exponent must be finite"));
        }
    }
    if deg_target > g.avg_degree() {
        return Err(Error::invalid(format!(
            "degree target {deg_target} exceeds the current average degree {}",
            g.avg_degree()
        )));
    }
    let mut cur = g.clone();
    let mut removed = 0;
    while cur.avg_degree() > deg_target {
        let bridges = cur.bridges();
        let mut pool: Vec<((NodeId, NodeId), f64)> = cur
            .edges()
            .iter()
            .filter(|e| !strategy.forbid_disconnect || bridges.binary_search(&e.ends()).is_err())
            .map(|e| (e.ends(), cur.edge_length(e)))
            .collect();
        let mut chosen = None;
        while !pool.is_empty() {
            let at = match strategy.mode {
                ThinningMode::LongestFirst => {
                    // longest wins; among equal lengths the lexicographically smallest edge
                    let mut best = 0;
                    for (i, cand) in pool.iter().enumerate().skip(1) {
                        if cand.1 > pool[best].1 {
                            best = i;
                        }
                    }
                    best
                }
                ThinningMode::UniformRandom => rng.gen_range(0..pool.len()),
                ThinningMode::LengthWeightedRandom { exponent } => {
                    let weights: Vec<f64> = pool.iter().map(|c| c.1.powf(exponent)).collect();
                    let total: f64 = weights.iter().sum();
                    if !(total > 0.0 && total.is_finite()) {
                        rng.gen_range(0..pool.len())
                    } else {
                        let mut x = rng.gen::<f64>() * total;
                        let mut at = pool.len() - 1;
                        for (i, w) in weights.iter().enumerate() {
                            if x < *w {
                                at = i;
                                break;
                            }
                            x -= w;
                        }
                        at
                    }
                }
            };
            let (e, _) = pool[at];
            if !strategy.forbid_new_bridges || removal_keeps_bridges(&cur, e, &bridges) {
                chosen = Some(e);
                break;
            }
            // ineligible this round
            pool.remove(at);
        }
        match chosen {
            Some(e) => {
                cur = cur.without_edges(&[e]);
                removed += 1;
            }
            None => return Ok(ThinOutcome { graph: cur, removed, reached: false }),
        }
    }
    Ok(ThinOutcome { graph: cur, removed, reached: true })
}

/// [`thin_edges`], failing with [`Error::TargetUnreachable`] when the target
/// cannot be met.
pub fn thin_to_degree<R: Rng + ?Sized>(
    g: &GeometricGraph,
    deg_target: f64,
    strategy: &ThinningStrategy,
    rng: &mut R,
) -> Result<GeometricGraph> {
    let out = thin_edges(g, deg_target, strategy, rng)?;
    if out.reached {
        Ok(out.graph)
    } else {
        Err(Error::TargetUnreachable { target: deg_target, reached: out.graph.avg_degree() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(points: &[(f64, f64)], edges: &[(usize, usize)]) -> GeometricGraph {
        GeometricGraph::from_parts(
            points.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            edges.iter().map(|&(a, b)| (a, b, EdgeTag::Udg)),
            0.3,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn connected_input_is_unchanged() {
        let g = GeometricGraph::cycle(5);
        assert_eq!(connect_components(&g), g);
    }

    #[test]
    fn joins_closest_cross_pair() {
        let g = graph(&[(0.0, 0.0), (0.1, 0.0), (0.9, 0.9), (0.8, 0.9)], &[(0, 1), (2, 3)]);
        let j = connect_components(&g);
        assert_eq!(j.edge_count(), 3);
        assert!(j.has_edge(NodeId(1), NodeId(3)));
        assert_eq!(j.edges().iter().filter(|e| e.tag == EdgeTag::Joined).count(), 1);
    }

    #[test]
    fn joins_singletons_shortest_first() {
        // cross pairs: 0-1 = 0.4, 1-2 = 0.5, 0-2 = 0.9
        let g = graph(&[(0.0, 0.0), (0.0, 0.4), (0.0, 0.9)], &[]);
        let j = connect_components(&g);
        assert_eq!(j.edge_count(), 2);
        assert!(j.has_edge(NodeId(0), NodeId(1)));
        assert!(j.has_edge(NodeId(1), NodeId(2)));
        assert!(j.is_connected());
    }

    #[test]
    fn bridge_path_chords() {
        let p4 = GeometricGraph::path(4);
        let out = eliminate_bridge_paths(&p4);
        assert!(out.has_edge(NodeId(0), NodeId(2)));
        assert!(out.has_edge(NodeId(1), NodeId(3)));
        assert_eq!(out.edge_count(), 5);
        assert!(out.bridges().is_empty());
        let c5 = GeometricGraph::cycle(5);
        assert_eq!(eliminate_bridge_paths(&c5), c5);
        let p2 = GeometricGraph::path(2);
        assert_eq!(eliminate_bridge_paths(&p2), p2);
    }

    #[test]
    fn bridge_between_triangles() {
        // triangle a: 0,1,2 on the left, triangle b: 3,4,5 on the right, bridge 2-3
        let g = graph(
            &[(0.1, 0.4), (0.1, 0.6), (0.3, 0.5), (0.6, 0.5), (0.8, 0.4), (0.8, 0.6)],
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        );
        let out = eliminate_bridges(&g).unwrap();
        assert!(out.bridges().is_empty());
        assert_eq!(out.edge_count(), g.edge_count() + 1);
        let added: Vec<_> = out.edges().iter().filter(|e| e.tag == EdgeTag::Debridged).collect();
        assert_eq!(added.len(), 1);
        for end in [added[0].u, added[0].v] {
            assert!(end != NodeId(2) && end != NodeId(3));
        }
    }

    #[test]
    fn bridge_free_and_degenerate_inputs() {
        let k4 = GeometricGraph::complete(4);
        assert_eq!(eliminate_bridges(&k4).unwrap(), k4);
        assert!(matches!(eliminate_bridges(&GeometricGraph::path(2)), Err(Error::IrreducibleBridge { .. })));
        let star = GeometricGraph::star(3);
        let out = eliminate_bridges(&star).unwrap();
        assert!(out.bridges().is_empty());
    }

    #[test]
    fn thinning_identity_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c5 = GeometricGraph::cycle(5);
        let s = ThinningStrategy::squared_length();
        assert_eq!(thin_to_degree(&c5, 2.0, &s, &mut rng).unwrap(), c5);
        for mode in [
            ThinningMode::LongestFirst,
            ThinningMode::UniformRandom,
            ThinningMode::LengthWeightedRandom { exponent: 2.0 },
        ] {
            let s = ThinningStrategy { mode, forbid_disconnect: true, forbid_new_bridges: false };
            let t = thin_to_degree(&GeometricGraph::complete(3), 4.0 / 3.0, &s, &mut rng).unwrap();
            assert_eq!(t.edge_count(), 2);
            assert!(t.is_connected());
        }
    }

    #[test]
    fn longest_first_drops_the_diagonal() {
        let g = graph(
            &[(0.2, 0.2), (0.4, 0.2), (0.4, 0.4), (0.2, 0.4)],
            &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)],
        );
        let s = ThinningStrategy { mode: ThinningMode::LongestFirst, forbid_disconnect: true, forbid_new_bridges: false };
        let t = thin_to_degree(&g, 2.0, &s, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(!t.has_edge(NodeId(0), NodeId(2)));
        assert_eq!(t.edge_count(), 4);
    }

    #[test]
    fn thinning_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = ThinningStrategy::squared_length();
        let p3 = GeometricGraph::path(3);
        assert!(matches!(thin_to_degree(&p3, 0.5, &s, &mut rng), Err(Error::TargetUnreachable { .. })));
        assert!(thin_to_degree(&p3, 3.0, &s, &mut rng).is_err());
        assert!(thin_to_degree(&p3, -1.0, &s, &mut rng).is_err());
        // C4 with forbid_new_bridges cannot lose any edge
        let nb = s.forbidding_new_bridges();
        assert!(thin_to_degree(&GeometricGraph::cycle(4), 1.0, &nb, &mut rng).is_err());
    }
}
