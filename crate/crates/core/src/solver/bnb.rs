//! Depth-first branch-and-bound over node portfolios.
//!
//! A node's portfolio is the set of means it holds, so the exactly-one,
//! fixed-k and cost rows are enforced by construction and the search only
//! decides coverage. Bounds are combinatorial: node `v` can still gain at
//! most `free(v) * max_portfolio_size` sets.

use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use super::greedy::{greedy_masks, local_search};
use crate::error::Result;
use crate::model::{CapacityMode, Formulation, IlpModel};

/// Objective of "no solution".
pub(super) const NONE: i64 = i64::MIN;

const TICK: u64 = 256;
const LOCAL_SEARCH_PASSES: usize = 50;

pub(crate) struct Instance {
    pub n: usize,
    pub full: u64,
    pub nb: Vec<Vec<usize>>,
    pub portfolios: Vec<u64>,
    pub max_size: u32,
    pub kind: Formulation,
    /// Masks of mutually interchangeable set labels.
    pub classes: Vec<u64>,
}

impl Instance {
    pub fn from_model(model: &IlpModel) -> Result<Self> {
        let nb = model
            .validate_structure()?
            .into_iter()
            .map(|ws| {
                let mut ws: Vec<usize> = ws.into_iter().map(|w| w.0).collect();
                ws.sort_unstable();
                ws
            })
            .collect();
        let n = model.meta.n;
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let portfolios = model.meta.capacity.portfolios(n);
        let max_size = portfolios.iter().map(|p| p.count_ones()).max().unwrap_or(0);
        let classes = match &model.meta.capacity {
            CapacityMode::Cost { costs, .. } => {
                let m = costs.as_slice();
                let mut classes: Vec<u64> = Vec::new();
                let mut seen = 0u64;
                for i in 0..n {
                    if seen >> i & 1 == 1 {
                        continue;
                    }
                    let class = (i..n).filter(|&j| m[j] == m[i]).fold(0u64, |c, j| c | 1 << j);
                    seen |= class;
                    classes.push(class);
                }
                classes
            }
            _ => vec![full],
        };
        Ok(Instance { n, full, nb, portfolios, max_size, kind: model.meta.formulation, classes })
    }

    /// Objective of a complete assignment, [`NONE`] if it is not a solution.
    pub fn score(&self, masks: &[u64]) -> i64 {
        let cov = self.nb.iter().map(|ws| ws.iter().fold(0u64, |c, &w| c | masks[w]));
        match self.kind {
            Formulation::OptimalSoft => cov.map(|c| c.count_ones() as i64).sum(),
            Formulation::MaximalSoft => cov.filter(|&c| c == self.full).count() as i64,
            Formulation::Feasibility => {
                if cov.into_iter().all(|c| c == self.full) {
                    0
                } else {
                    NONE
                }
            }
        }
    }
}

struct Control {
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    abort: AtomicBool,
    best: AtomicI64,
    best_masks: Mutex<Option<Vec<u64>>>,
    nodes: AtomicU64,
}

impl Control {
    fn best(&self) -> i64 {
        self.best.load(Ordering::Acquire)
    }

    fn offer(&self, value: i64, masks: &[u64]) {
        let mut slot = self.best_masks.lock().expect("incumbent lock");
        if value > self.best() {
            *slot = Some(masks.to_vec());
            self.best.store(value, Ordering::Release);
        }
    }
}

/// A subtree root for parallel search: the decisions leading to it.
struct Task {
    path: Vec<(usize, u64)>,
    used: u64,
    bound: i64,
}

struct Search<'a> {
    inst: &'a Instance,
    ctl: &'a Control,
    masks: Vec<u64>,
    assigned: Vec<bool>,
    cov: Vec<u64>,
    free: Vec<u32>,
    trail: Vec<u64>,
    sum_ub: i64,
    full_ub: usize,
    /// Labels already used on the current path.
    used: u64,
    path: Vec<(usize, u64)>,
    nodes: u64,
    aborted: bool,
    /// Largest bound among subtrees left unexplored by an abort.
    open_bound: i64,
    split_depth: Option<usize>,
    tasks: Vec<Task>,
}

fn lowest_bits(mut m: u64, k: u32) -> u64 {
    let mut out = 0;
    for _ in 0..k {
        let b = m & m.wrapping_neg();
        out |= b;
        m ^= b;
    }
    out
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, ctl: &'a Control) -> Self {
        let nodes = inst.nb.len();
        let free: Vec<u32> = inst.nb.iter().map(|ws| ws.len() as u32).collect();
        let mut s = Search {
            inst,
            ctl,
            masks: vec![0; nodes],
            assigned: vec![false; nodes],
            cov: vec![0; nodes],
            free,
            trail: Vec::new(),
            sum_ub: 0,
            full_ub: 0,
            used: 0,
            path: Vec::new(),
            nodes: 0,
            aborted: false,
            open_bound: NONE,
            split_depth: None,
            tasks: Vec::new(),
        };
        for v in 0..nodes {
            let ub = s.ub(v);
            s.sum_ub += ub as i64;
            s.full_ub += (ub == inst.n as u32) as usize;
        }
        s
    }

    fn ub(&self, v: usize) -> u32 {
        let reach = self.cov[v].count_ones() as u64 + self.free[v] as u64 * self.inst.max_size as u64;
        reach.min(self.inst.n as u64) as u32
    }

    fn bound(&self) -> i64 {
        match self.inst.kind {
            Formulation::OptimalSoft => self.sum_ub,
            Formulation::MaximalSoft => self.full_ub as i64,
            Formulation::Feasibility => {
                if self.full_ub == self.inst.nb.len() {
                    0
                } else {
                    NONE
                }
            }
        }
    }

    fn assign(&mut self, w: usize, p: u64) {
        let n = self.inst.n as u32;
        for k in 0..self.inst.nb[w].len() {
            let u = self.inst.nb[w][k];
            let old = self.ub(u);
            self.trail.push(self.cov[u]);
            self.cov[u] |= p;
            self.free[u] -= 1;
            let new = self.ub(u);
            self.sum_ub += new as i64 - old as i64;
            if old == n && new < n {
                self.full_ub -= 1;
            }
        }
        self.masks[w] = p;
        self.assigned[w] = true;
    }

    fn unassign(&mut self, w: usize) {
        let n = self.inst.n as u32;
        for k in (0..self.inst.nb[w].len()).rev() {
            let u = self.inst.nb[w][k];
            let old = self.ub(u);
            self.cov[u] = self.trail.pop().expect("trail underflow");
            self.free[u] += 1;
            let new = self.ub(u);
            self.sum_ub += new as i64 - old as i64;
            if old < n && new == n {
                self.full_ub += 1;
            }
        }
        self.masks[w] = 0;
        self.assigned[w] = false;
    }

    /// Can `v`'s score still change?
    fn live(&self, v: usize) -> bool {
        self.cov[v] != self.inst.full && (self.inst.kind != Formulation::MaximalSoft || self.ub(v) == self.inst.n as u32)
    }

    /// The live node with the least spare capacity in its neighbourhood.
    fn pick_critical(&self) -> Option<usize> {
        let mut best: Option<(i64, usize, usize)> = None;
        for v in 0..self.inst.nb.len() {
            if self.free[v] == 0 || !self.live(v) {
                continue;
            }
            let slack = self.cov[v].count_ones() as i64 + self.free[v] as i64 * self.inst.max_size as i64
                - self.inst.n as i64;
            let key = (slack, self.inst.nb[v].len(), v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        best.map(|b| b.2)
    }

    fn pick_branch(&self, v: usize) -> usize {
        let mut best = (0usize, usize::MAX);
        for &w in &self.inst.nb[v] {
            if self.assigned[w] {
                continue;
            }
            let reach = self.inst.nb[w].iter().filter(|&&u| self.live(u)).count();
            if best.1 == usize::MAX || reach > best.0 {
                best = (reach, w);
            }
        }
        best.1
    }

    /// Set labels are interchangeable within a class, so a portfolio may
    /// only introduce the lowest unused labels of each class.
    fn allowed(&self, p: u64) -> bool {
        self.inst.classes.iter().all(|&c| {
            let fresh = c & !self.used;
            let new = p & fresh;
            new == lowest_bits(fresh, new.count_ones())
        })
    }

    fn children(&self, w: usize) -> Vec<u64> {
        let mut scored: Vec<(u32, usize, u64)> = self
            .inst
            .portfolios
            .iter()
            .enumerate()
            .filter(|&(_, &p)| self.allowed(p))
            .map(|(k, &p)| {
                let gain = self.inst.nb[w]
                    .iter()
                    .filter(|&&u| self.live(u))
                    .map(|&u| (p & !self.cov[u]).count_ones())
                    .sum::<u32>();
                (gain, k, p)
            })
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.into_iter().map(|s| s.2).collect()
    }

    fn tick(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(TICK) {
            let total = self.ctl.nodes.fetch_add(TICK, Ordering::Relaxed) + TICK;
            let out_of_time = self.ctl.deadline.is_some_and(|d| Instant::now() >= d);
            let out_of_nodes = self.ctl.node_limit.is_some_and(|l| total >= l);
            if out_of_time || out_of_nodes {
                self.ctl.abort.store(true, Ordering::Relaxed);
            }
            self.aborted = self.ctl.abort.load(Ordering::Relaxed);
        }
        self.aborted
    }

    /// No live node has free neighbours left, so any completion scores the
    /// same; fill with the first portfolio.
    fn leaf(&mut self) {
        let filled: Vec<usize> = (0..self.inst.nb.len()).filter(|&w| !self.assigned[w]).collect();
        for &w in &filled {
            self.assign(w, self.inst.portfolios[0]);
        }
        let value = self.bound();
        if value != NONE && value > self.ctl.best() {
            self.ctl.offer(value, &self.masks);
        }
        for &w in filled.iter().rev() {
            self.unassign(w);
        }
    }

    fn dfs(&mut self, depth: usize) {
        if self.tick() {
            self.open_bound = self.open_bound.max(self.bound());
            return;
        }
        let Some(v) = self.pick_critical() else {
            self.leaf();
            return;
        };
        if self.split_depth == Some(depth) {
            self.tasks.push(Task { path: self.path.clone(), used: self.used, bound: self.bound() });
            return;
        }
        let w = self.pick_branch(v);
        let children = self.children(w);
        for (k, &p) in children.iter().enumerate() {
            if self.aborted {
                for &q in &children[k..] {
                    self.assign(w, q);
                    let b = self.bound();
                    if b > self.ctl.best() {
                        self.open_bound = self.open_bound.max(b);
                    }
                    self.unassign(w);
                }
                break;
            }
            let used = self.used;
            self.assign(w, p);
            self.used |= p;
            self.path.push((w, p));
            if self.bound() > self.ctl.best() {
                self.dfs(depth + 1);
            }
            self.path.pop();
            self.used = used;
            self.unassign(w);
        }
    }

    fn flush(&self) {
        self.ctl.nodes.fetch_add(self.nodes % TICK, Ordering::Relaxed);
    }
}

pub(super) struct Outcome {
    pub value: i64,
    pub masks: Option<Vec<u64>>,
    /// Proven upper bound; equals `value` when the search completed.
    pub bound: i64,
    pub complete: bool,
    pub nodes: u64,
}

pub(super) fn search(inst: &Instance, deadline: Option<Instant>, node_limit: Option<u64>, threads: usize) -> Outcome {
    let ctl = Control {
        deadline,
        node_limit,
        abort: AtomicBool::new(false),
        best: AtomicI64::new(NONE),
        best_masks: Mutex::new(None),
        nodes: AtomicU64::new(0),
    };
    if let Some(mut masks) = greedy_masks(inst) {
        local_search(inst, &mut masks, LOCAL_SEARCH_PASSES);
        let value = inst.score(&masks);
        if value != NONE {
            ctl.offer(value, &masks);
        }
    }

    let mut open = NONE;
    if !inst.portfolios.is_empty() {
        let root = Search::new(inst, &ctl);
        if root.bound() > ctl.best() {
            if threads <= 1 {
                let mut s = root;
                s.dfs(0);
                s.flush();
                open = s.open_bound;
            } else {
                open = parallel(inst, &ctl, threads);
            }
        }
    }

    let value = ctl.best();
    let masks = ctl.best_masks.into_inner().expect("incumbent lock");
    let complete = !ctl.abort.load(Ordering::Relaxed);
    let bound = if complete { value } else { value.max(open) };
    Outcome { value, masks, bound, complete, nodes: ctl.nodes.load(Ordering::Relaxed) }
}

/// Split the tree at a shallow depth, then let workers pull subtrees.
fn parallel(inst: &Instance, ctl: &Control, threads: usize) -> i64 {
    let mut open = NONE;
    let mut tasks = Vec::new();
    for depth in 1..=16 {
        let mut s = Search::new(inst, ctl);
        s.split_depth = Some(depth);
        s.dfs(0);
        s.flush();
        open = open.max(s.open_bound);
        tasks = s.tasks;
        if s.aborted || tasks.len() >= 4 * threads || tasks.is_empty() {
            break;
        }
    }
    let next = AtomicUsize::new(0);
    let opens: Vec<i64> = std::thread::scope(|scope| {
        let workers: Vec<_> = (0..threads)
            .map(|_| {
                scope.spawn(|| {
                    let mut open = NONE;
                    loop {
                        let at = next.fetch_add(1, Ordering::Relaxed);
                        let Some(task) = tasks.get(at) else { break };
                        if ctl.abort.load(Ordering::Relaxed) {
                            open = open.max(task.bound);
                            continue;
                        }
                        let mut s = Search::new(inst, ctl);
                        for &(w, p) in &task.path {
                            s.assign(w, p);
                            s.path.push((w, p));
                        }
                        s.used = task.used;
                        if s.bound() > ctl.best() {
                            s.dfs(task.path.len());
                        }
                        s.flush();
                        open = open.max(s.open_bound);
                    }
                    open
                })
            })
            .collect();
        workers.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    opens.into_iter().fold(open, i64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeometricGraph;
    use crate::model::*;

    fn run(m: &IlpModel, threads: usize) -> Outcome {
        search(&Instance::from_model(m).unwrap(), None, None, threads)
    }

    #[test]
    fn lowest_bits_picks_prefix() {
        assert_eq!(lowest_bits(0b10110, 2), 0b00110);
        assert_eq!(lowest_bits(0b10110, 0), 0);
        assert_eq!(lowest_bits(0b1, 3), 0b1);
    }

    #[test]
    fn star_values() {
        let star = GeometricGraph::star(4);
        assert_eq!(run(&build_optimal_soft(&star, 3).unwrap(), 1).value, 11);
        assert_eq!(run(&build_maximal_soft(&star, 3).unwrap(), 1).value, 1);
        let f = run(&build_domatic_feasibility(&star, 3).unwrap(), 1);
        assert!(f.complete && f.value == NONE && f.masks.is_none());
    }

    #[test]
    fn cost_classes_split_unequal_costs() {
        let m = build_cost_based(&GeometricGraph::path(2), 3, CostVector::new(vec![0.5, 0.5, 1.0]).unwrap()).unwrap();
        let inst = Instance::from_model(&m).unwrap();
        assert_eq!(inst.classes, vec![0b011, 0b100]);
        assert_eq!(inst.portfolios, vec![0b011, 0b100]);
    }

    #[test]
    fn threads_agree() {
        let g = GeometricGraph::cycle(14);
        for f in [Formulation::OptimalSoft, Formulation::MaximalSoft] {
            let m = build_model(&g, 4, f, CapacityMode::ExactlyOne).unwrap();
            assert_eq!(run(&m, 1).value, run(&m, 4).value);
        }
    }
}
