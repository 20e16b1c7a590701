//! C ABI for the graph generator and partition solver.
//!
//! Graphs and solve reports are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`UdgStatus`]; on a non-OK
//! status the message is available from [`udg_last_error`] on the same
//! thread. Strings handed out by the library must be released with
//! [`udg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use udg_domatic::generator::{generate_connected, place_nodes_seeded, GeneratorParams};
use udg_domatic::io::{graph_from_json, graph_to_json};
use udg_domatic::lp::export_lp;
use udg_domatic::metrics::{coverage_errors, CoverageErrors};
use udg_domatic::model::{build_model, CapacityMode, Formulation};
use udg_domatic::solver::{solve, SolveLimits, SolveReport, SolveStatus};
use udg_domatic::{Error, GeometricGraph};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UdgStatus {
    Ok = 0,
    /// Malformed arguments or documents.
    InvalidInput = 1,
    /// Well-formed request the domain cannot satisfy.
    DomainFailure = 2,
    NullPointer = 3,
    /// A Rust panic was caught at the boundary.
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UdgObjective {
    Feasible = 0,
    Optimal = 1,
    Maximal = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UdgSolveStatus {
    Optimal = 0,
    FeasibleTimeLimit = 1,
    TimeLimit = 2,
    Infeasible = 3,
    Error = 4,
}

/// Opaque graph handle.
pub struct UdgGraph(GeometricGraph);

/// Opaque solve result: the report plus errors recomputed on the graph.
pub struct UdgReport {
    report: SolveReport,
    errors: Option<CoverageErrors>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> UdgStatus {
    set_error(e.to_string());
    if e.is_usage() {
        UdgStatus::InvalidInput
    } else {
        UdgStatus::DomainFailure
    }
}

fn guard(f: impl FnOnce() -> UdgStatus) -> UdgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            UdgStatus::Internal
        }
    }
}

fn null(what: &str) -> UdgStatus {
    set_error(format!("{what} is null"));
    UdgStatus::NullPointer
}

fn give_string(s: String, out: *mut *mut c_char) -> UdgStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: caller checked `out` is non-null.
            unsafe { *out = c.into_raw() };
            UdgStatus::Ok
        }
        Err(_) => {
            set_error("string contains a nul byte".into());
            UdgStatus::Internal
        }
    }
}

fn formulation(o: UdgObjective) -> Formulation {
    match o {
        UdgObjective::Feasible => Formulation::Feasibility,
        UdgObjective::Optimal => Formulation::OptimalSoft,
        UdgObjective::Maximal => Formulation::MaximalSoft,
    }
}

/// Copy of the calling thread's last error message, or null if none.
/// Release with [`udg_string_free`].
#[no_mangle]
pub extern "C" fn udg_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn udg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a graph JSON document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_graph_from_json(json: *const c_char, out: *mut *mut UdgGraph) -> UdgStatus {
    guard(|| {
        if json.is_null() {
            return null("json");
        }
        if out.is_null() {
            return null("out");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            set_error("json is not valid UTF-8".into());
            return UdgStatus::InvalidInput;
        };
        match graph_from_json(text) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(UdgGraph(g)));
                UdgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Place `nodes` nodes on a `grid`-resolution grid. With
/// `require_connected`, retry up to `max_attempts` times until the graph is
/// connected.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_graph_generate(
    nodes: usize,
    lambda: f64,
    r_tr: f64,
    grid: usize,
    seed: u64,
    require_connected: bool,
    max_attempts: usize,
    out: *mut *mut UdgGraph,
) -> UdgStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let params = GeneratorParams::new(nodes, lambda, r_tr).with_grid(grid).with_seed(seed);
        let graph = if require_connected {
            generate_connected(&params, &mut params.rng(), max_attempts).map(|c| c.graph)
        } else {
            place_nodes_seeded(&params).map(|p| p.graph)
        };
        match graph {
            Ok(g) => {
                *out = Box::into_raw(Box::new(UdgGraph(g)));
                UdgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `graph` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_graph_to_json(graph: *const UdgGraph, out: *mut *mut c_char) -> UdgStatus {
    guard(|| {
        if graph.is_null() {
            return null("graph");
        }
        if out.is_null() {
            return null("out");
        }
        give_string(graph_to_json(&(*graph).0), out)
    })
}

/// Zero for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn udg_graph_node_count(graph: *const UdgGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn udg_graph_edge_count(graph: *const UdgGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn udg_graph_avg_degree(graph: *const UdgGraph) -> f64 {
    graph.as_ref().map_or(0.0, |g| g.0.avg_degree())
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn udg_graph_free(graph: *mut UdgGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Solve the one-set-per-node model for `n` sets within `time_limit`
/// seconds. An infeasible model still yields a report.
///
/// # Safety
/// `graph` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_solve(
    graph: *const UdgGraph,
    n: usize,
    objective: UdgObjective,
    time_limit: f64,
    out: *mut *mut UdgReport,
) -> UdgStatus {
    guard(|| {
        if graph.is_null() {
            return null("graph");
        }
        if out.is_null() {
            return null("out");
        }
        let g = &(*graph).0;
        let limits = SolveLimits::with_time_limit(time_limit);
        if let Err(e) = limits.validate() {
            return fail(e);
        }
        let model = match build_model(g, n, formulation(objective), CapacityMode::ExactlyOne) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let report = solve(&model, &limits);
        let errors = report.assignment.as_ref().and_then(|a| coverage_errors(g, a).ok());
        *out = Box::into_raw(Box::new(UdgReport { report, errors }));
        UdgStatus::Ok
    })
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn udg_report_status(report: *const UdgReport) -> UdgSolveStatus {
    match report.as_ref().map(|r| r.report.status) {
        Some(SolveStatus::Optimal) => UdgSolveStatus::Optimal,
        Some(SolveStatus::FeasibleTimeLimit) => UdgSolveStatus::FeasibleTimeLimit,
        Some(SolveStatus::TimeLimit) => UdgSolveStatus::TimeLimit,
        Some(SolveStatus::Infeasible) => UdgSolveStatus::Infeasible,
        Some(SolveStatus::Error) | None => UdgSolveStatus::Error,
    }
}

unsafe fn report_value(report: *const UdgReport, out: *mut f64, pick: fn(&UdgReport) -> Option<f64>) -> UdgStatus {
    guard(|| {
        let Some(r) = report.as_ref() else { return null("report") };
        if out.is_null() {
            return null("out");
        }
        match pick(r) {
            Some(v) => {
                *out = v;
                UdgStatus::Ok
            }
            None => {
                set_error("report has no such value".into());
                UdgStatus::DomainFailure
            }
        }
    })
}

/// # Safety
/// `report` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_report_objective(report: *const UdgReport, out: *mut f64) -> UdgStatus {
    report_value(report, out, |r| r.report.objective)
}

/// # Safety
/// `report` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_report_best_bound(report: *const UdgReport, out: *mut f64) -> UdgStatus {
    report_value(report, out, |r| r.report.best_bound)
}

/// Missing coverages and incompletely covered nodes of the assignment.
///
/// # Safety
/// `report` must be a live handle; both outputs writable pointers.
#[no_mangle]
pub unsafe extern "C" fn udg_report_errors(
    report: *const UdgReport,
    miss_cov: *mut usize,
    inc_nodes: *mut usize,
) -> UdgStatus {
    guard(|| {
        let Some(r) = report.as_ref() else { return null("report") };
        if miss_cov.is_null() || inc_nodes.is_null() {
            return null("output");
        }
        match &r.errors {
            Some(e) => {
                *miss_cov = e.miss_cov;
                *inc_nodes = e.inc_nodes;
                UdgStatus::Ok
            }
            None => {
                set_error("report has no assignment".into());
                UdgStatus::DomainFailure
            }
        }
    })
}

/// The 1-based set held by `node`.
///
/// # Safety
/// `report` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_report_set_of(report: *const UdgReport, node: usize, out: *mut usize) -> UdgStatus {
    guard(|| {
        let Some(r) = report.as_ref() else { return null("report") };
        if out.is_null() {
            return null("out");
        }
        match r.report.assignment.as_ref().and_then(|a| a.assign.get(node)) {
            Some(sets) if !sets.is_empty() => {
                *out = sets[0];
                UdgStatus::Ok
            }
            _ => {
                set_error(format!("no set recorded for node {node}"));
                UdgStatus::InvalidInput
            }
        }
    })
}

/// Full report as one JSON document.
///
/// # Safety
/// `report` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_report_to_json(report: *const UdgReport, out: *mut *mut c_char) -> UdgStatus {
    guard(|| {
        let Some(r) = report.as_ref() else { return null("report") };
        if out.is_null() {
            return null("out");
        }
        let mut doc = serde_json::to_value(&r.report).expect("reports serialise");
        doc["errors"] = serde_json::to_value(&r.errors).expect("errors serialise");
        give_string(doc.to_string(), out)
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn udg_report_free(report: *mut UdgReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// LP text of the one-set-per-node model.
///
/// # Safety
/// `graph` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn udg_export_lp(
    graph: *const UdgGraph,
    n: usize,
    objective: UdgObjective,
    out: *mut *mut c_char,
) -> UdgStatus {
    guard(|| {
        if graph.is_null() {
            return null("graph");
        }
        if out.is_null() {
            return null("out");
        }
        match build_model(&(*graph).0, n, formulation(objective), CapacityMode::ExactlyOne) {
            Ok(m) => give_string(export_lp(&m), out),
            Err(e) => fail(e),
        }
    })
}
