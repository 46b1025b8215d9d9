#ifndef EQUIPART_H
#define EQUIPART_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EqStatus {
  EQ_STATUS_OK = 0,
  EQ_STATUS_NULL_POINTER = 1,
  EQ_STATUS_INVALID_ARGUMENT = 2,
  EQ_STATUS_NON_CONVERGENCE = 3,
  EQ_STATUS_PARSE = 4,
  EQ_STATUS_PANIC = 5,
  EQ_STATUS_BUFFER_TOO_SMALL = 6,
} EqStatus;

// Density field handle.
typedef struct EqDensity EqDensity;

// Iterated partition handle.
typedef struct EqPartition EqPartition;

// Convex polygon handle.
typedef struct EqPolygon EqPolygon;

// Result of [`eq_decide_obstruction`].
typedef struct EqVerdict {
  // 1 if the equivariant map exists, 0 otherwise.
  uint8_t exists_map;
  uint64_t gcd;
  // The common prime when `exists_map == 0`, else 0.
  uint64_t prime;
} EqVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next call into this library on the same thread.
const char *eq_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *eq_version(void);

// Creates a polygon from `n_vertices` counter-clockwise `(x, y)` pairs.
//
// # Safety
// `xy` must point to `2 * n_vertices` doubles; `out` must be writable.
enum EqStatus eq_polygon_new(const double *xy, size_t n_vertices, struct EqPolygon **out);

// Parses `{"vertices": [[x, y], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum EqStatus eq_polygon_from_json(const char *json, struct EqPolygon **out);

// # Safety
// `p` must be NULL or a handle from this library not yet freed.
void eq_polygon_free(struct EqPolygon *p);

// # Safety
// `p` must be a live polygon handle; `out` must be writable.
enum EqStatus eq_polygon_area(const struct EqPolygon *p, double *out);

// # Safety
// `p` must be a live polygon handle; `out` must be writable.
enum EqStatus eq_polygon_perimeter(const struct EqPolygon *p, double *out);

// # Safety
// `out` must be writable.
enum EqStatus eq_density_uniform(double value, struct EqDensity **out);

// Piecewise-constant density on a `rows x cols` grid of square cells;
// `values` is row-major with row 0 at the bottom.
//
// # Safety
// `values` must point to `rows * cols` doubles; `out` must be writable.
enum EqStatus eq_density_grid(double origin_x,
                              double origin_y,
                              double cell_size,
                              const double *values,
                              size_t rows,
                              size_t cols,
                              struct EqDensity **out);

// # Safety
// `d` must be NULL or a handle from this library not yet freed.
void eq_density_free(struct EqDensity *d);

// Solves for weights giving cell measures `lambda_i * mu(body)`.
//
// `lambda` may be NULL for equal fractions. `max_iter == 0` selects the
// default budget. `residual_out` may be NULL; when given it receives the
// final relative residual, also on non-convergence.
//
// # Safety
// `sites_xy` must hold `2 * n` doubles, `lambda` (if not NULL) and
// `weights_out` `n` doubles each.
enum EqStatus eq_solve_weights(const struct EqPolygon *body,
                               const struct EqDensity *density,
                               const double *sites_xy,
                               size_t n,
                               const double *lambda,
                               double tol,
                               size_t max_iter,
                               double *weights_out,
                               double *residual_out);

// Iterated partition of type `(ns[0], ..., ns[k-1])`.
//
// `sites_xy` lists every site of the site tree depth first: the sites of
// top-level cell 0's subtree, then cell 1's, ..., then the root's own
// `ns[k-1]` sites; recursively the same inside each subtree.
//
// # Safety
// `ns` must hold `k` entries and `sites_xy` `2 * n_sites` doubles.
enum EqStatus eq_iterated_partition(const struct EqPolygon *body,
                                    const struct EqDensity *density,
                                    const size_t *ns,
                                    size_t k,
                                    const double *sites_xy,
                                    size_t n_sites,
                                    double tol,
                                    struct EqPartition **out);

// # Safety
// `p` must be a live partition handle; `out` must be writable.
enum EqStatus eq_partition_leaf_count(const struct EqPartition *p, size_t *out);

// Copies the vertices of leaf `leaf` into `xy_out` (room for `capacity`
// vertices). `n_vertices_out` always receives the vertex count; if it
// exceeds `capacity` nothing is copied and `EQ_STATUS_BUFFER_TOO_SMALL` is
// returned.
//
// # Safety
// `xy_out` must hold `2 * capacity` doubles (may be NULL if `capacity` is 0).
enum EqStatus eq_partition_leaf_vertices(const struct EqPartition *p,
                                         size_t leaf,
                                         double *xy_out,
                                         size_t capacity,
                                         size_t *n_vertices_out);

// # Safety
// `p` must be NULL or a handle from this library not yet freed.
void eq_partition_free(struct EqPartition *p);

// # Safety
// `ns` must hold `k` entries; `out` must be writable.
enum EqStatus eq_decide_obstruction(const size_t *ns, size_t k, size_t d, struct EqVerdict *out);

// `(d - 1)(n_1 ⋯ n_k - 1)`.
//
// # Safety
// `ns` must hold `k` entries; `out` must be writable.
enum EqStatus eq_wvector_dim(const size_t *ns, size_t k, size_t d, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EQUIPART_H */
