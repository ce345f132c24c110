#ifndef CRITWALK_H
#define CRITWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CwStatus {
  CW_STATUS_OK = 0,
  CW_STATUS_NULL_POINTER = 1,
  CW_STATUS_INVALID_ARGUMENT = 2,
  CW_STATUS_INVALID_CURVE = 3,
  CW_STATUS_CONFIG = 4,
  CW_STATUS_IO = 5,
  CW_STATUS_BUFFER_TOO_SMALL = 6,
  CW_STATUS_INTERNAL = 7,
  CW_STATUS_PANIC = 8,
} CwStatus;

// Outcome of one acceptance criterion.
typedef struct CwReport CwReport;

// Seeded random stream.
typedef struct CwRng CwRng;

// Finite ordered rooted tree.
typedef struct CwTree CwTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *cw_last_error(void);

// # Safety
// `out` must be a valid pointer.
enum CwStatus cw_rng_new(uint64_t seed, struct CwRng **out);

// # Safety
// `rng` must come from [`cw_rng_new`] and not be used afterwards.
void cw_rng_free(struct CwRng *rng);

// `E[exp(-lambda N_p)]` for the `T*` cluster size, `0 < p <= 1/2`.
//
// # Safety
// `out` must be a valid pointer.
enum CwStatus cw_cluster_size_laplace(double p, double lambda, double *out);

// One inverse-Gaussian draw with parameters `(delta, gamma)` at time `t`.
//
// # Safety
// `rng` and `out` must be valid pointers.
enum CwStatus cw_sample_inverse_gaussian(struct CwRng *rng,
                                         double delta,
                                         double gamma,
                                         double t,
                                         double *out);

// Critical binary cluster conditioned on `n` vertices (`uniform == 0`), or
// a uniform ordered tree on `n` vertices.
//
// # Safety
// `rng` and `out` must be valid pointers.
enum CwStatus cw_tree_sample(struct CwRng *rng, size_t n, int32_t uniform, struct CwTree **out);

// Rebuilds a tree from its search-depth curve of `len` values.
//
// # Safety
// `values` must point to `len` readable values and `out` must be valid.
enum CwStatus cw_tree_from_search_depth(const uint32_t *values, size_t len, struct CwTree **out);

// # Safety
// `tree` must come from this library and not be used afterwards.
void cw_tree_free(struct CwTree *tree);

// Number of vertices, or 0 for a null handle.
//
// # Safety
// `tree` must be null or a valid handle.
size_t cw_tree_vertex_count(const struct CwTree *tree);

// Copies the search-depth curve into `buf`. `needed` receives the curve
// length; a short buffer yields `CW_STATUS_BUFFER_TOO_SMALL` and nothing is
// copied.
//
// # Safety
// `tree` and `needed` must be valid; `buf` must hold `cap` values.
enum CwStatus cw_tree_search_depth(const struct CwTree *tree,
                                   uint32_t *buf,
                                   size_t cap,
                                   size_t *needed);

// Expected exit time of the walk from the root through the planted edge.
//
// # Safety
// `tree` and `out` must be valid pointers.
enum CwStatus cw_tree_expected_exit_time(const struct CwTree *tree, double *out);

// One exit time of the walk through the planted edge.
//
// # Safety
// All pointers must be valid.
enum CwStatus cw_tree_sample_exit_time(const struct CwTree *tree, struct CwRng *rng, uint64_t *out);

// Runs acceptance criterion `criterion` (1 to 13). `replicates == 0`
// keeps the preset count.
//
// # Safety
// `out` must be a valid pointer.
enum CwStatus cw_verify(uint32_t criterion,
                        uint64_t seed,
                        size_t replicates,
                        struct CwReport **out);

// 1 if every check passed, 0 otherwise (or for a null handle).
//
// # Safety
// `report` must be null or a valid handle.
int32_t cw_report_passed(const struct CwReport *report);

// The report as JSON, owned by the handle.
//
// # Safety
// `report` must be null or a valid handle.
const char *cw_report_json(const struct CwReport *report);

// # Safety
// `report` must come from [`cw_verify`] and not be used afterwards.
void cw_report_free(struct CwReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRITWALK_H */
