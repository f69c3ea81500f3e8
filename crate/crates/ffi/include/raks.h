#ifndef RAKS_H
#define RAKS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RaksStatus {
  RAKS_STATUS_OK = 0,
  RAKS_STATUS_NULL_POINTER = 1,
  RAKS_STATUS_INVALID_UTF8 = 2,
  RAKS_STATUS_IO = 3,
  RAKS_STATUS_BAD_INDEX = 4,
  RAKS_STATUS_INVALID_QUERY = 5,
  RAKS_STATUS_UNRESOLVED = 6,
  RAKS_STATUS_INVALID_PARAMS = 7,
  RAKS_STATUS_INTERNAL = 8,
  RAKS_STATUS_PANIC = 9,
} RaksStatus;

/**
 * Opaque loaded index.
 */
typedef struct RaksIndex RaksIndex;

typedef struct RaksQueryParams {
  uint32_t topk;
  /**
   * 0 means equal to `topk`.
   */
  uint32_t beam;
  double gamma;
  uint32_t max_level;
  /**
   * 0 means one per available core.
   */
  uint32_t threads;
  /**
   * Non-positive means no limit.
   */
  double time_limit_s;
} RaksQueryParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default query parameters.
 */
struct RaksQueryParams raks_query_params_default(void);

/**
 * Loads an index file into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RaksStatus raks_index_load(const char *path, struct RaksIndex **out);

/**
 * Releases an index. Null is ignored.
 *
 * # Safety
 * `index` must come from `raks_index_load` and not be used afterwards.
 */
void raks_index_free(struct RaksIndex *index);

/**
 * # Safety
 * `index` must be null or a live handle.
 */
size_t raks_index_node_count(const struct RaksIndex *index);

/**
 * Number of directed edges, inverse edges included.
 *
 * # Safety
 * `index` must be null or a live handle.
 */
size_t raks_index_edge_count(const struct RaksIndex *index);

/**
 * Runs a query and stores the JSON result document in `*out_json`.
 * `params` may be null for defaults.
 *
 * # Safety
 * `index` must be a live handle; `central` must point to `n_central`
 * NUL-terminated strings and `marginal` to `n_marginal` (or be null when the
 * count is zero); `out_json` must be a valid pointer.
 */
enum RaksStatus raks_query_json(const struct RaksIndex *index,
                                const char *const *central,
                                size_t n_central,
                                const char *const *marginal,
                                size_t n_marginal,
                                const struct RaksQueryParams *params,
                                char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void raks_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *raks_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAKS_H */
