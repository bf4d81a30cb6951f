#ifndef ANB_H
#define ANB_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Marks an absent value in `AnbMetrics`, e.g. a round that never happened.
 */
#define ANB_NONE UINT64_MAX

/**
 * Status codes returned by every fallible call.
 */
typedef enum AnbStatus {
  ANB_STATUS_OK = 0,
  ANB_STATUS_NULL_POINTER = 1,
  ANB_STATUS_INVALID_ARGUMENT = 2,
  ANB_STATUS_GRAPH = 3,
  ANB_STATUS_SIMULATION = 4,
  ANB_STATUS_ORACLE = 5,
  ANB_STATUS_BUFFER_TOO_SMALL = 6,
  ANB_STATUS_PANIC = 7,
} AnbStatus;

typedef enum AnbAlgorithm {
  ANB_ALGORITHM_ANB = 0,
  ANB_ALGORITHM_ALL_TO_ALL = 1,
  ANB_ALGORITHM_SINGLE_TREE = 2,
} AnbAlgorithm;

/**
 * Opaque graph handle.
 */
typedef struct AnbGraph AnbGraph;

/**
 * Opaque run result handle.
 */
typedef struct AnbResult AnbResult;

/**
 * Run options. Zero-initialise and set what you need.
 */
typedef struct AnbRunOptions {
  enum AnbAlgorithm algorithm;
  /**
   * Upper bound on the network size; 0 means the graph's own size.
   */
  uint64_t n_max;
  /**
   * Run the invariant checker (aggregate-and-broadcast only).
   */
  bool verify;
  /**
   * Keep running until the round budget even when the network is quiet.
   */
  bool no_early_stop;
} AnbRunOptions;

/**
 * Scalar results of one run. Rounds that did not occur are `ANB_NONE`.
 */
typedef struct AnbMetrics {
  uint64_t n;
  bool correct;
  uint64_t rounds_executed;
  uint64_t t_reduction;
  uint64_t t_broadcast;
  uint64_t t_total;
  uint64_t m1;
  uint64_t m2;
  uint64_t m3;
  uint64_t m4;
  uint64_t m5;
  uint64_t m6;
  uint64_t m_total;
  /**
   * All-to-all only, otherwise `ANB_NONE`.
   */
  uint64_t id_broadcasts;
  uint64_t residue_count;
  double residue_fraction;
  double avg_degree;
  uint64_t mem_max_bits;
  uint64_t mem_formula_bits;
} AnbMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into this library on the same thread.
 */
const char *anb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *anb_version(void);

/**
 * Generates a connected graph. `family` is one of `ba`, `er`, `ws`, `rgg`,
 * `star`, `complete`, `path`, `ring`.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
enum AnbStatus anb_graph_generate(const char *family,
                                  uintptr_t n,
                                  uint64_t seed,
                                  struct AnbGraph **out);

/**
 * Builds a graph from `edge_count` pairs laid out as `u0, v0, u1, v1, ...`.
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable values (or be NULL when
 * `edge_count` is 0); `out` must be writable.
 */
enum AnbStatus anb_graph_from_edges(uintptr_t n,
                                    const uintptr_t *edges,
                                    uintptr_t edge_count,
                                    struct AnbGraph **out);

/**
 * Loads a whitespace-separated edge list file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum AnbStatus anb_graph_load(const char *path, struct AnbGraph **out);

/**
 * # Safety
 * `g` must be NULL or a handle from this library not yet freed.
 */
void anb_graph_free(struct AnbGraph *g);

/**
 * Number of nodes, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
uintptr_t anb_graph_node_count(const struct AnbGraph *g);

/**
 * Number of undirected edges, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
uintptr_t anb_graph_edge_count(const struct AnbGraph *g);

/**
 * Longest shortest path, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
uintptr_t anb_graph_diameter(const struct AnbGraph *g);

/**
 * Runs one simulation in counting mode.
 *
 * # Safety
 * `g` must be a live handle, `opts` readable and `out` writable.
 */
enum AnbStatus anb_run(const struct AnbGraph *g,
                       const struct AnbRunOptions *opts,
                       struct AnbResult **out);

/**
 * Runs aggregate-and-broadcast in summation mode; node `i` starts with
 * `numerators[i] / denominators[i]`, which must be positive.
 *
 * # Safety
 * `g` must be a live handle; both arrays must hold `len` values; `opts`
 * readable and `out` writable.
 */
enum AnbStatus anb_run_sum(const struct AnbGraph *g,
                           const int64_t *numerators,
                           const int64_t *denominators,
                           uintptr_t len,
                           const struct AnbRunOptions *opts,
                           struct AnbResult **out);

/**
 * Copies the scalar results into `out`.
 *
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum AnbStatus anb_result_metrics(const struct AnbResult *r, struct AnbMetrics *out);

/**
 * Whether every node finished with the exact total; false for NULL.
 *
 * # Safety
 * `r` must be NULL or a live handle.
 */
bool anb_result_correct(const struct AnbResult *r);

/**
 * Writes node `node`'s final value as `num/den` (NUL-terminated) into `buf`.
 * `needed` receives the buffer size required, terminator included; call with
 * `buf_len == 0` to query it.
 *
 * # Safety
 * `r` must be a live handle; `buf` must hold `buf_len` bytes; `needed` must be
 * writable or NULL.
 */
enum AnbStatus anb_result_final_count(const struct AnbResult *r,
                                      uintptr_t node,
                                      char *buf,
                                      uintptr_t buf_len,
                                      uintptr_t *needed);

/**
 * # Safety
 * `r` must be NULL or a handle from this library not yet freed.
 */
void anb_result_free(struct AnbResult *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANB_H */
