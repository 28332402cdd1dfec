#ifndef HGKIT_H
#define HGKIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HG_SUITE_IDENTITIES 0

#define HG_SUITE_CONNECTION 1

#define HG_SUITE_CURVATURE 2

#define HG_SUITE_ALL 3

typedef enum HgStatus {
  HG_STATUS_OK = 0,
  HG_STATUS_NULL_POINTER = 1,
  HG_STATUS_INVALID_UTF8 = 2,
  HG_STATUS_PARSE = 3,
  HG_STATUS_INVALID_MODEL = 4,
  HG_STATUS_INVALID_ARGUMENT = 5,
  HG_STATUS_BUFFER_TOO_SMALL = 6,
  HG_STATUS_PANIC = 7,
} HgStatus;

/**
 * A validated Lie algebra with metric and hypercomplex triple.
 */
typedef struct HgModel HgModel;

/**
 * Admissible point data (g, H, F1, F2).
 */
typedef struct HgPointModel HgPointModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *hg_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hg_string_free(char *s);

/**
 * Parses and validates a model from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum HgStatus hg_model_from_json(const char *json, struct HgModel **out);

/**
 * The abelian algebra of dimension 4n with the standard structure.
 *
 * # Safety
 * `out` must be writable.
 */
enum HgStatus hg_model_standard_abelian(size_t n, struct HgModel **out);

/**
 * # Safety
 * `m` must come from this library and not have been freed.
 */
void hg_model_free(struct HgModel *m);

/**
 * Ambient dimension 4n.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum HgStatus hg_model_dimension(const struct HgModel *m, size_t *out);

/**
 * Writes F_alpha (alpha in 1..=3) as d^3 row-major values, F[x][y][z].
 *
 * # Safety
 * `m` must be a live handle and `buf` must hold `len` doubles.
 */
enum HgStatus hg_model_structural_f(const struct HgModel *m,
                                    uint32_t alpha,
                                    double *buf,
                                    size_t len);

/**
 * Classification report as JSON.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum HgStatus hg_model_classify_json(const struct HgModel *m, double tol, char **out);

/**
 * Verification report as JSON; `all_pass` receives 1 when no applicable check fails.
 *
 * # Safety
 * `m` must be a live handle; `out` and `all_pass` writable.
 */
enum HgStatus hg_model_verify_json(const struct HgModel *m,
                                   double tol,
                                   uint32_t suite,
                                   char **out,
                                   int32_t *all_pass);

/**
 * Dimension of the space of Kahler-like tensors for the standard structure
 * in dimension 4n; `hermitian_only` drops the J2, J3 conditions.
 *
 * # Safety
 * `out` must be writable.
 */
enum HgStatus hg_kahler_like_nullspace(size_t n, bool hermitian_only, size_t *out);

/**
 * Random admissible point data in dimension 4n.
 *
 * # Safety
 * `out` must be writable.
 */
enum HgStatus hg_point_model_sample(size_t n, uint64_t seed, struct HgPointModel **out);

/**
 * Orthogonal projection onto W1(J1) with W3(J2) and W3(J3).
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum HgStatus hg_point_model_project_w133(const struct HgPointModel *p, struct HgPointModel **out);

/**
 * Writes F_alpha of point data as d^3 row-major values.
 *
 * # Safety
 * `p` must be a live handle and `buf` must hold `len` doubles.
 */
enum HgStatus hg_point_model_f(const struct HgPointModel *p,
                               uint32_t alpha,
                               double *buf,
                               size_t len);

/**
 * Point data as JSON.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum HgStatus hg_point_model_to_json(const struct HgPointModel *p, char **out);

/**
 * # Safety
 * `p` must come from this library and not have been freed.
 */
void hg_point_model_free(struct HgPointModel *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HGKIT_H */
