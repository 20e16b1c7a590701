//! Exact solving of partition models: a brute-force oracle, a greedy warm
//! start and a time-limited branch-and-bound.

mod bnb;
pub mod brute;
pub mod check;
mod greedy;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IlpModel, PartitionAssignment};

pub use brute::{brute_force, brute_force_with_cap, DEFAULT_ORACLE_CAP};
pub use greedy::greedy_incumbent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveLimits {
    /// Wall-clock seconds.
    pub time_limit: f64,
    pub node_limit: Option<u64>,
    pub threads: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { time_limit: 1200.0, node_limit: None, threads: 1 }
    }
}

impl SolveLimits {
    pub fn with_time_limit(time_limit: f64) -> Self {
        SolveLimits { time_limit, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_limit > 0.0) || self.time_limit.is_nan() {
            return Err(Error::invalid(format!("time limit must be positive, got {}", self.time_limit)));
        }
        if self.threads == 0 {
            return Err(Error::invalid("threads must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped by a limit with an incumbent in hand.
    FeasibleTimeLimit,
    /// Stopped by a limit before any solution was found.
    TimeLimit,
    Infeasible,
    Error,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleTimeLimit => "feasible-time-limit",
            SolveStatus::TimeLimit => "time-limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Error => "error",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SolveStatus::Optimal,
            SolveStatus::FeasibleTimeLimit,
            SolveStatus::TimeLimit,
            SolveStatus::Infeasible,
            SolveStatus::Error,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
        .ok_or_else(|| Error::invalid(format!("unknown solve status {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub assignment: Option<PartitionAssignment>,
    pub objective: Option<f64>,
    /// Upper bound on the optimum (maximisation).
    pub best_bound: Option<f64>,
    pub wall_time: f64,
    pub explored_nodes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SolveReport {
    pub(crate) fn infeasible(wall_time: f64, explored_nodes: u64) -> Self {
        SolveReport {
            status: SolveStatus::Infeasible,
            assignment: None,
            objective: None,
            best_bound: None,
            wall_time,
            explored_nodes,
            message: None,
        }
    }

    fn error(message: String, wall_time: f64) -> Self {
        SolveReport {
            status: SolveStatus::Error,
            assignment: None,
            objective: None,
            best_bound: None,
            wall_time,
            explored_nodes: 0,
            message: Some(message),
        }
    }
}

/// Branch-and-bound under `limits`. Every returned assignment has been
/// re-validated row by row.
pub fn solve(model: &IlpModel, limits: &SolveLimits) -> SolveReport {
    let start = Instant::now();
    if let Err(e) = limits.validate() {
        return SolveReport::error(e.to_string(), 0.0);
    }
    let inst = match bnb::Instance::from_model(model) {
        Ok(inst) => inst,
        Err(e) => return SolveReport::error(e.to_string(), start.elapsed().as_secs_f64()),
    };
    let deadline = Duration::try_from_secs_f64(limits.time_limit).ok().and_then(|d| start.checked_add(d));
    let out = bnb::search(&inst, deadline, limits.node_limit, limits.threads);
    let wall_time = start.elapsed().as_secs_f64();

    let bound = (out.bound != bnb::NONE).then_some(out.bound as f64);
    let Some(masks) = out.masks else {
        let mut report = SolveReport::infeasible(wall_time, out.nodes);
        if !out.complete {
            report.status = SolveStatus::TimeLimit;
            report.best_bound = bound;
        }
        return report;
    };
    let assignment = PartitionAssignment::from_masks(model.meta.n, &masks);
    match check::verify(model, &assignment) {
        Ok(obj) if obj == out.value as f64 => SolveReport {
            status: if out.complete { SolveStatus::Optimal } else { SolveStatus::FeasibleTimeLimit },
            assignment: Some(assignment),
            objective: Some(obj),
            best_bound: bound,
            wall_time,
            explored_nodes: out.nodes,
            message: None,
        },
        Ok(obj) => SolveReport::error(format!("search value {} disagrees with checked objective {obj}", out.value), wall_time),
        Err(e) => SolveReport::error(format!("search returned an invalid assignment: {e}"), wall_time),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GeometricGraph;
    use crate::model::*;

    #[test]
    fn analytic_fixtures() {
        let limits = SolveLimits::default();
        let star = GeometricGraph::star(4);
        let r = solve(&build_domatic_feasibility(&star, 3).unwrap(), &limits);
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.assignment.is_none());
        let r = solve(&build_maximal_soft(&star, 3).unwrap(), &limits);
        assert_eq!((r.status, r.objective, r.best_bound), (SolveStatus::Optimal, Some(1.0), Some(1.0)));
        let r = solve(&build_optimal_soft(&GeometricGraph::path(2), 3).unwrap(), &limits);
        assert_eq!(r.objective, Some(4.0));
        let r = solve(&build_domatic_feasibility(&GeometricGraph::cycle(6), 3).unwrap(), &limits);
        assert_eq!((r.status, r.objective), (SolveStatus::Optimal, Some(0.0)));
    }

    #[test]
    fn bad_inputs_report_errors() {
        let m = build_optimal_soft(&GeometricGraph::path(3), 2).unwrap();
        assert_eq!(solve(&m, &SolveLimits::with_time_limit(0.0)).status, SolveStatus::Error);
        let mut broken = m.clone();
        broken.constraints.pop();
        let r = solve(&broken, &SolveLimits::default());
        assert_eq!(r.status, SolveStatus::Error);
        assert!(r.message.is_some());
    }

    #[test]
    fn node_limit_keeps_contract() {
        let g = GeometricGraph::cycle(40);
        let m = build_maximal_soft(&g, 4).unwrap();
        let r = solve(&m, &SolveLimits { node_limit: Some(300), ..SolveLimits::default() });
        if r.status == SolveStatus::FeasibleTimeLimit {
            assert!(r.objective.unwrap() <= r.best_bound.unwrap());
            check::verify(&m, r.assignment.as_ref().unwrap()).unwrap();
        } else {
            assert_eq!(r.status, SolveStatus::Optimal);
        }
    }

    #[test]
    fn status_strings_round_trip() {
        for s in ["optimal", "feasible-time-limit", "time-limit", "infeasible", "error"] {
            assert_eq!(s.parse::<SolveStatus>().unwrap().as_str(), s);
        }
        assert_eq!(serde_json::to_string(&SolveStatus::FeasibleTimeLimit).unwrap(), "\"feasible-time-limit\"");
    }
}
