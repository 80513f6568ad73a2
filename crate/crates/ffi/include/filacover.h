#ifndef FILACOVER_H
#define FILACOVER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define FC_PATHS_BFS 0

#define FC_PATHS_RMST 1

#define FC_PATHS_BOTH 2

#define FC_MODE_EXACT 0

#define FC_MODE_OVER 1

#define FC_OBJECTIVE_TOTAL 0

#define FC_OBJECTIVE_AVG 1

#define FC_ROUGHNESS_PAIR 0

#define FC_ROUGHNESS_ALL 1

/**
 * Passed as `d` to [`fc_compare`] for the unbounded distance.
 */
#define FC_DISTANCE_INF 0

/**
 * Outcome of a call.
 */
typedef enum {
  FC_STATUS_OK = 0,
  FC_STATUS_NULL_POINTER = 1,
  FC_STATUS_INVALID_ARGUMENT = 2,
  FC_STATUS_PARSE = 3,
  FC_STATUS_VALIDATION = 4,
  FC_STATUS_MISSING_COORDINATES = 5,
  FC_STATUS_DEGENERATE_GEOMETRY = 6,
  FC_STATUS_POOL_EXPLOSION = 7,
  FC_STATUS_GRAPH_MISMATCH = 8,
  FC_STATUS_INFEASIBLE_EXACT_COVER = 9,
  FC_STATUS_NODE_LIMIT_EXCEEDED = 10,
  FC_STATUS_NUMERICAL_FAILURE = 11,
  FC_STATUS_NOT_A_TREE = 12,
  FC_STATUS_K_TOO_LARGE = 13,
  FC_STATUS_MISMATCHED_EDGE_SETS = 14,
  FC_STATUS_CONFIG = 15,
  FC_STATUS_IO = 16,
  FC_STATUS_BUFFER_TOO_SMALL = 17,
  FC_STATUS_PANIC = 18,
} FcStatus;

/**
 * Opaque cover handle.
 */
typedef struct FcCover FcCover;

/**
 * Opaque graph handle.
 */
typedef struct FcGraph FcGraph;

/**
 * Sampling and solver options; obtain defaults from
 * [`fc_options_default`].
 */
typedef struct {
  uint32_t paths;
  uint32_t cover_mode;
  uint32_t objective;
  uint32_t roughness;
  double angle_threshold_deg;
  uintptr_t rmst_trees;
  uintptr_t max_paths;
  uint64_t seed;
  uint64_t node_limit;
} FcOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fc_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until
 * the next call into the library on the same thread.
 */
const char *fc_last_error_message(void);

/**
 * Default options: BFS pool, over mode, total objective, pair roughness.
 */
FcOptions fc_options_default(void);

/**
 * Parses a graph from NUL-terminated GML text.
 *
 * # Safety
 * `text` must be a valid C string and `out` a writable pointer.
 */
FcStatus fc_graph_from_gml(const char *text, FcGraph **out);

/**
 * Builds a graph from arrays. `coords` holds `dim` values per node (row
 * major) or is NULL with `dim = 0` for a graph without coordinates.
 *
 * # Safety
 * Every array must hold the stated number of elements.
 */
FcStatus fc_graph_from_arrays(uintptr_t n_nodes,
                              const int64_t *node_ids,
                              const double *coords,
                              uintptr_t dim,
                              uintptr_t n_edges,
                              const int64_t *sources,
                              const int64_t *targets,
                              const double *weights,
                              FcGraph **out);

/**
 * Number of nodes, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
uintptr_t fc_graph_node_count(const FcGraph *graph);

/**
 * Number of edges, or 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
uintptr_t fc_graph_edge_count(const FcGraph *graph);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `graph` must be NULL or a handle not yet freed.
 */
void fc_graph_free(FcGraph *graph);

/**
 * Samples a path pool and solves the cover program.
 *
 * # Safety
 * `graph` and `options` must be live, `out` writable.
 */
FcStatus fc_decompose(const FcGraph *graph, const FcOptions *options, FcCover **out);

/**
 * Exact cover of a tree with at most `k_overlap` paths per edge.
 *
 * # Safety
 * `graph` must be live and `out` writable.
 */
FcStatus fc_solve_tree(const FcGraph *graph,
                       uintptr_t k_overlap,
                       uint32_t objective_kind,
                       uint32_t roughness_kind,
                       FcCover **out);

/**
 * Number of filaments, or 0 for NULL.
 *
 * # Safety
 * `cover` must be NULL or a live handle.
 */
uintptr_t fc_cover_filament_count(const FcCover *cover);

/**
 * Objective value, or NaN for NULL.
 *
 * # Safety
 * `cover` must be NULL or a live handle.
 */
double fc_cover_objective(const FcCover *cover);

/**
 * Copies the ordered edge ids of filament `index` into `buf`. `len`
 * receives the required length; returns `BufferTooSmall` if `cap` is
 * insufficient (nothing is copied then).
 *
 * # Safety
 * `cover` must be live, `buf` must hold `cap` elements, `len` writable.
 */
FcStatus fc_cover_filament_edges(const FcCover *cover,
                                 uintptr_t index,
                                 uintptr_t *buf,
                                 uintptr_t cap,
                                 uintptr_t *len);

/**
 * Copies the labels of edge `edge` into `buf`, with the same length
 * protocol as [`fc_cover_filament_edges`].
 *
 * # Safety
 * `cover` must be live, `buf` must hold `cap` elements, `len` writable.
 */
FcStatus fc_cover_edge_labels(const FcCover *cover,
                              uintptr_t edge,
                              uint32_t *buf,
                              uintptr_t cap,
                              uintptr_t *len);

/**
 * Serializes the graph annotated with the cover's labels as GML. The
 * returned string must be released with [`fc_string_free`].
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
FcStatus fc_cover_to_gml(const FcGraph *graph, const FcCover *cover, char **out);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void fc_string_free(char *s);

/**
 * Rand and Jaccard indices between two covers of `graph` restricted to
 * edge pairs within line-graph distance `d` (`FC_DISTANCE_INF` for all
 * pairs).
 *
 * # Safety
 * All handles must be live; `ri` and `ji` writable.
 */
FcStatus fc_compare(const FcGraph *graph,
                    const FcCover *a,
                    const FcCover *b,
                    uint32_t d,
                    double *ri,
                    double *ji);

/**
 * Releases a cover. NULL is ignored.
 *
 * # Safety
 * `cover` must be NULL or a handle not yet freed.
 */
void fc_cover_free(FcCover *cover);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FILACOVER_H */
