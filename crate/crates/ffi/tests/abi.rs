use std::ffi::{c_char, CStr, CString};
use std::ptr;

use udg_domatic_ffi::*;

const P3: &str = r#"{"lambda": 0.1, "r_tr": 0.5, "nodes": [[0.1, 0.1], [0.4, 0.1], [0.7, 0.1]], "edges": [[0, 1], [1, 2]]}"#;

fn graph(json: &str) -> *mut UdgGraph {
    let text = CString::new(json).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { udg_graph_from_json(text.as_ptr(), &mut g) }, UdgStatus::Ok);
    g
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { udg_string_free(s) };
    out
}

fn last_error() -> String {
    take(udg_last_error())
}

#[test]
fn graph_accessors_and_round_trip() {
    let g = graph(P3);
    unsafe {
        assert_eq!(udg_graph_node_count(g), 3);
        assert_eq!(udg_graph_edge_count(g), 2);
        assert!((udg_graph_avg_degree(g) - 4.0 / 3.0).abs() < 1e-12);
        let mut s = ptr::null_mut();
        assert_eq!(udg_graph_to_json(g, &mut s), UdgStatus::Ok);
        let back = graph(&take(s));
        assert_eq!(udg_graph_edge_count(back), 2);
        udg_graph_free(back);
        udg_graph_free(g);
    }
}

#[test]
fn solve_path_optimally() {
    let g = graph(P3);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(udg_solve(g, 2, UdgObjective::Maximal, 10.0, &mut r), UdgStatus::Ok);
        assert_eq!(udg_report_status(r), UdgSolveStatus::Optimal);
        let (mut obj, mut bound) = (0.0, 0.0);
        assert_eq!(udg_report_objective(r, &mut obj), UdgStatus::Ok);
        assert_eq!(udg_report_best_bound(r, &mut bound), UdgStatus::Ok);
        assert_eq!((obj, bound), (3.0, 3.0));
        let (mut miss, mut inc) = (9, 9);
        assert_eq!(udg_report_errors(r, &mut miss, &mut inc), UdgStatus::Ok);
        assert_eq!((miss, inc), (0, 0));
        let mut sets = [0usize; 3];
        for (v, s) in sets.iter_mut().enumerate() {
            assert_eq!(udg_report_set_of(r, v, s), UdgStatus::Ok);
        }
        assert_ne!(sets[0], sets[1]);
        assert_ne!(sets[1], sets[2]);
        assert_eq!(udg_report_set_of(r, 3, &mut sets[0]), UdgStatus::InvalidInput);
        let mut s = ptr::null_mut();
        assert_eq!(udg_report_to_json(r, &mut s), UdgStatus::Ok);
        let doc: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
        assert_eq!(doc["status"], "optimal");
        assert_eq!(doc["errors"]["inc_nodes"], 0);
        udg_report_free(r);
        udg_graph_free(g);
    }
}

#[test]
fn infeasible_model_still_reports() {
    let g = graph(P3);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(udg_solve(g, 3, UdgObjective::Feasible, 10.0, &mut r), UdgStatus::Ok);
        assert_eq!(udg_report_status(r), UdgSolveStatus::Infeasible);
        let mut obj = 0.0;
        assert_eq!(udg_report_objective(r, &mut obj), UdgStatus::DomainFailure);
        udg_report_free(r);
        udg_graph_free(g);
    }
}

#[test]
fn generate_and_export() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(udg_graph_generate(20, 0.21, 0.36, 200, 7, true, 100, &mut g), UdgStatus::Ok);
        assert_eq!(udg_graph_node_count(g), 20);
        let mut s = ptr::null_mut();
        assert_eq!(udg_export_lp(g, 3, UdgObjective::Optimal, &mut s), UdgStatus::Ok);
        let lp = take(s);
        assert!(lp.contains("Maximize") && lp.contains("Binary") && lp.trim_end().ends_with("End"));
        udg_graph_free(g);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(udg_graph_generate(20, 0.5, 0.3, 200, 1, false, 1, &mut g), UdgStatus::InvalidInput);
        assert!(g.is_null());
        assert!(!last_error().is_empty());

        let bad = CString::new("{not json").unwrap();
        assert_eq!(udg_graph_from_json(bad.as_ptr(), &mut g), UdgStatus::InvalidInput);
        assert_eq!(udg_graph_from_json(ptr::null(), &mut g), UdgStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut r = ptr::null_mut();
        assert_eq!(udg_solve(ptr::null(), 3, UdgObjective::Optimal, 1.0, &mut r), UdgStatus::NullPointer);
        let p = graph(P3);
        assert_eq!(udg_solve(p, 0, UdgObjective::Optimal, 1.0, &mut r), UdgStatus::InvalidInput);
        assert_eq!(udg_solve(p, 2, UdgObjective::Optimal, -1.0, &mut r), UdgStatus::InvalidInput);
        assert_eq!(udg_report_status(ptr::null()), UdgSolveStatus::Error);
        assert_eq!(udg_graph_node_count(ptr::null()), 0);
        udg_graph_free(p);
        udg_graph_free(ptr::null_mut());
        udg_report_free(ptr::null_mut());
        udg_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_abi() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/udg_domatic.h");
    let header = std::fs::read_to_string(path).unwrap();
    for name in [
        "typedef struct UdgGraph UdgGraph;",
        "typedef struct UdgReport UdgReport;",
        "UDG_STATUS_OK = 0",
        "UDG_STATUS_INVALID_INPUT = 1",
        "UDG_SOLVE_STATUS_FEASIBLE_TIME_LIMIT = 1",
        "UDG_OBJECTIVE_MAXIMAL = 2",
        "udg_last_error(void)",
        "udg_graph_from_json",
        "udg_graph_generate",
        "udg_solve",
        "udg_report_set_of",
        "udg_report_free",
        "udg_export_lp",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    // compile the header as C where a compiler is available
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", path])
        .status()
    else {
        return;
    };
    assert!(status.success());
}
