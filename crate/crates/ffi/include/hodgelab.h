#ifndef HODGELAB_H
#define HODGELAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Sampling scheme selector for [`hl_graph_sample`].
typedef enum HlScheme {
  HL_SCHEME_WITH_REPLACEMENT = 0,
  HL_SCHEME_WITHOUT_REPLACEMENT = 1,
  HL_SCHEME_GREEDY = 2,
  HL_SCHEME_TWO_STAGE = 3,
} HlScheme;

// Status codes returned by every fallible function.
typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_ARGUMENT = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_DISCONNECTED = 3,
  HL_STATUS_DOMAIN_ERROR = 4,
  HL_STATUS_BUDGET_ERROR = 5,
  HL_STATUS_PARSE_ERROR = 6,
  HL_STATUS_IO_ERROR = 7,
  HL_STATUS_BUFFER_TOO_SMALL = 8,
  HL_STATUS_PANIC = 9,
} HlStatus;

// Opaque graph handle.
typedef struct HlGraph HlGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent error on this thread, or NULL when no error has
// occurred. Free with [`hl_string_free`].
char *hl_last_error_message(void);

// Free a string returned by this library.
//
// # Safety
// `s` must be a pointer returned by [`hl_last_error_message`] (or NULL) that
// has not been freed yet.
void hl_string_free(char *s);

// Library version as a static string; do not free.
const char *hl_version(void);

// Sample a graph. `transition_p0` is only read for the two-stage scheme.
// On success writes a new handle to `out`; free it with [`hl_graph_free`].
// # Safety
// `out` must be valid for writing one pointer.
enum HlStatus hl_graph_sample(enum HlScheme scheme,
                              uintptr_t n,
                              uintptr_t m,
                              uint64_t seed,
                              double transition_p0,
                              struct HlGraph **out);

// Build a graph by aggregating a comparison-record CSV
// (`i,j,value,annotator`) over `n` vertices.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` as in
// [`hl_graph_sample`].
enum HlStatus hl_graph_from_records_csv(const char *path, uintptr_t n, struct HlGraph **out);

// Release a graph handle. NULL is a no-op.
//
// # Safety
// `g` must be a handle returned by this library that has not been freed.
void hl_graph_free(struct HlGraph *g);

// Number of vertices.
// # Safety
// `g` must be a live handle from this library; `out` must be writable.
enum HlStatus hl_graph_vertex_count(const struct HlGraph *g, uintptr_t *out);

// Number of distinct edges.
// # Safety
// `g` must be a live handle from this library; `out` must be writable.
enum HlStatus hl_graph_edge_count(const struct HlGraph *g, uintptr_t *out);

// Total edge weight (the number of draws for with-replacement samples).
// # Safety
// `g` must be a live handle from this library; `out` must be writable.
enum HlStatus hl_graph_total_weight(const struct HlGraph *g, double *out);

// Minimal weighted degree.
// # Safety
// `g` must be a live handle from this library; `out` must be writable.
enum HlStatus hl_graph_min_degree(const struct HlGraph *g, double *out);

// 1 if the graph is connected, 0 otherwise.
// # Safety
// `g` must be a live handle from this library; `out` must be writable.
enum HlStatus hl_graph_is_connected(const struct HlGraph *g, int32_t *out);

// Fiedler value (algebraic connectivity) of the graph Laplacian.
// # Safety
// `g` must be a live handle from this library; `out` must be writable.
enum HlStatus hl_graph_fiedler_value(const struct HlGraph *g, double *out);

// Global scores of a connected graph. `scores` must hold `len >= n` doubles;
// `residual_norm` (optional) receives the solver residual.
// # Safety
// `g` must be a live handle; `scores` must be valid for writing `len`
// doubles; `residual_norm` may be NULL or writable.
enum HlStatus hl_graph_rank(const struct HlGraph *g,
                            double *scores,
                            uintptr_t len,
                            double *residual_norm);

// Sensitivity certificate `1 / lambda_2`.
// # Safety
// `g` must be a live handle from this library; `out` must be writable.
enum HlStatus hl_graph_sensitivity(const struct HlGraph *g, double *out);

// Root of `p0 - 1 = a p0 (1 - ln a)` on (0, 1).
// # Safety
// `out` must be valid for writing one double.
enum HlStatus hl_solve_a(double p0, double *out);

// Finite-size estimate of the normalized Fiedler value under sampling with
// replacement, for the budget `m` on `n` vertices.
// # Safety
// `out` must be valid for writing one double.
enum HlStatus hl_estimate_with_replacement(uintptr_t n, double m, double *out);

// Finite-size estimate of the normalized Fiedler value under sampling
// without replacement.
// # Safety
// `out` must be valid for writing one double.
enum HlStatus hl_estimate_without_replacement(uintptr_t n, double m, double *out);

// Tail-bound exponent function `H(a) = a - a ln(a) - 1`.
// # Safety
// `out` must be valid for writing one double.
enum HlStatus hl_entropy_h(double a, double *out);

// Union-bound estimate of `P(d_min <= 2am/n)` under sampling with
// replacement.
// # Safety
// `out` must be valid for writing one double.
enum HlStatus hl_min_degree_tail_bound(uintptr_t n, double m, double a, double *out);

// Chernoff-Hoeffding tail bounds for a sample mean; see the library docs for
// which side each value covers.
// # Safety
// `lower_out` and `upper_out` must be valid for writing one double each.
enum HlStatus hl_chernoff_bounds(uintptr_t n_trials,
                                 double mu,
                                 double k,
                                 double *lower_out,
                                 double *upper_out);

// Uniform `[0,1]` ground-truth scores for simulation studies. `scores` must
// hold `n` doubles.
// # Safety
// `scores` must be valid for writing `n` doubles.
enum HlStatus hl_generate_ground_truth(uintptr_t n, uint64_t seed, double *scores);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HODGELAB_H */
