#ifndef UDG_DOMATIC_H
#define UDG_DOMATIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UdgObjective {
  UDG_OBJECTIVE_FEASIBLE = 0,
  UDG_OBJECTIVE_OPTIMAL = 1,
  UDG_OBJECTIVE_MAXIMAL = 2,
} UdgObjective;

typedef enum UdgSolveStatus {
  UDG_SOLVE_STATUS_OPTIMAL = 0,
  UDG_SOLVE_STATUS_FEASIBLE_TIME_LIMIT = 1,
  UDG_SOLVE_STATUS_TIME_LIMIT = 2,
  UDG_SOLVE_STATUS_INFEASIBLE = 3,
  UDG_SOLVE_STATUS_ERROR = 4,
} UdgSolveStatus;

/**
 * Result code of every fallible call.
 */
typedef enum UdgStatus {
  UDG_STATUS_OK = 0,
  /**
   * Malformed arguments or documents.
   */
  UDG_STATUS_INVALID_INPUT = 1,
  /**
   * Well-formed request the domain cannot satisfy.
   */
  UDG_STATUS_DOMAIN_FAILURE = 2,
  UDG_STATUS_NULL_POINTER = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  UDG_STATUS_INTERNAL = 4,
} UdgStatus;

/**
 * Opaque graph handle.
 */
typedef struct UdgGraph UdgGraph;

/**
 * Opaque solve result: the report plus errors recomputed on the graph.
 */
typedef struct UdgReport UdgReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the calling thread's last error message, or null if none.
 * Release with [`udg_string_free`].
 */
char *udg_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void udg_string_free(char *s);

/**
 * Parse a graph JSON document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` a writable pointer.
 */
enum UdgStatus udg_graph_from_json(const char *json, struct UdgGraph **out);

/**
 * Place `nodes` nodes on a `grid`-resolution grid. With
 * `require_connected`, retry up to `max_attempts` times until the graph is
 * connected.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum UdgStatus udg_graph_generate(size_t nodes,
                                  double lambda,
                                  double r_tr,
                                  size_t grid,
                                  uint64_t seed,
                                  bool require_connected,
                                  size_t max_attempts,
                                  struct UdgGraph **out);

/**
 * # Safety
 * `graph` must be a live handle; `out` a writable pointer.
 */
enum UdgStatus udg_graph_to_json(const struct UdgGraph *graph, char **out);

/**
 * Zero for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t udg_graph_node_count(const struct UdgGraph *graph);

/**
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t udg_graph_edge_count(const struct UdgGraph *graph);

/**
 * # Safety
 * `graph` must be null or a live handle.
 */
double udg_graph_avg_degree(const struct UdgGraph *graph);

/**
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void udg_graph_free(struct UdgGraph *graph);

/**
 * Solve the one-set-per-node model for `n` sets within `time_limit`
 * seconds. An infeasible model still yields a report.
 *
 * # Safety
 * `graph` must be a live handle; `out` a writable pointer.
 */
enum UdgStatus udg_solve(const struct UdgGraph *graph,
                         size_t n,
                         enum UdgObjective objective,
                         double time_limit,
                         struct UdgReport **out);

/**
 * # Safety
 * `report` must be a live handle.
 */
enum UdgSolveStatus udg_report_status(const struct UdgReport *report);

/**
 * # Safety
 * `report` must be a live handle; `out` a writable pointer.
 */
enum UdgStatus udg_report_objective(const struct UdgReport *report, double *out);

/**
 * # Safety
 * `report` must be a live handle; `out` a writable pointer.
 */
enum UdgStatus udg_report_best_bound(const struct UdgReport *report, double *out);

/**
 * Missing coverages and incompletely covered nodes of the assignment.
 *
 * # Safety
 * `report` must be a live handle; both outputs writable pointers.
 */
enum UdgStatus udg_report_errors(const struct UdgReport *report,
                                 size_t *miss_cov,
                                 size_t *inc_nodes);

/**
 * The 1-based set held by `node`.
 *
 * # Safety
 * `report` must be a live handle; `out` a writable pointer.
 */
enum UdgStatus udg_report_set_of(const struct UdgReport *report, size_t node, size_t *out);

/**
 * Full report as one JSON document.
 *
 * # Safety
 * `report` must be a live handle; `out` a writable pointer.
 */
enum UdgStatus udg_report_to_json(const struct UdgReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void udg_report_free(struct UdgReport *report);

/**
 * LP text of the one-set-per-node model.
 *
 * # Safety
 * `graph` must be a live handle; `out` a writable pointer.
 */
enum UdgStatus udg_export_lp(const struct UdgGraph *graph,
                             size_t n,
                             enum UdgObjective objective,
                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UDG_DOMATIC_H */
