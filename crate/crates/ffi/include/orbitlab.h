/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ORBITLAB_H
#define ORBITLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OlStatus {
  OL_STATUS_OK = 0,
  OL_STATUS_INVALID_INPUT = 1,
  OL_STATUS_DOMAIN = 2,
  OL_STATUS_RESOURCE = 3,
  OL_STATUS_NUMERIC = 4,
  OL_STATUS_CACHE = 5,
  OL_STATUS_MISSING_CACHE = 6,
  OL_STATUS_IO = 7,
  OL_STATUS_NULL_POINTER = 8,
  OL_STATUS_PANIC = 9,
} OlStatus;

/**
 * A product of `SL(n)` factors.
 */
typedef struct OlGroup OlGroup;

/**
 * Enumerated orbit of a rank-one lattice.
 */
typedef struct OlOrbit OlOrbit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ol_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next `ol_` call on the same thread.
 */
const char *ol_last_error(void);

/**
 * Group `SL(ns[0]) x ... x SL(ns[len-1])` with default metric scales.
 *
 * # Safety
 * `ns` must point to `len` readable values and `out` must be writable.
 */
enum OlStatus ol_group_new(const size_t *ns, size_t len, struct OlGroup **out);

/**
 * # Safety
 * `g` must come from [`ol_group_new`] and not be freed twice. Null is ignored.
 */
void ol_group_free(struct OlGroup *g);

/**
 * Length of a Cartan vector (sum of the factor sizes).
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum OlStatus ol_group_ambient_dim(const struct OlGroup *g, size_t *out);

/**
 * Cartan projection `a_log` (length [`ol_group_ambient_dim`]) and its norm.
 *
 * # Safety
 * `entries` must hold `len` values, `a_log` `a_len` writable values, `mu_norm` writable.
 */
enum OlStatus ol_cartan(const struct OlGroup *g,
                        const double *entries,
                        size_t len,
                        double *a_log,
                        size_t a_len,
                        double *mu_norm);

/**
 * `d(K, K g)`.
 *
 * # Safety
 * `entries` must hold `len` values and `out` be writable.
 */
enum OlStatus ol_distance_to_origin(const struct OlGroup *g,
                                    const double *entries,
                                    size_t len,
                                    double *out);

/**
 * `log Vol(B_T)` for the group's Haar normalization.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum OlStatus ol_log_ball_volume(const struct OlGroup *g, double t, double *out);

/**
 * Enumerates the orbit of a standard rank-one lattice out to radius `t`.
 * `kind` is 0 for `PSL(2,Z)`, 1 for `Gamma0(level)`, 2 for `Gamma(level)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum OlStatus ol_orbit_enumerate(uint32_t kind, uint32_t level, double t, struct OlOrbit **out);

/**
 * # Safety
 * `p` must be a NUL-terminated path and `out` writable.
 */
enum OlStatus ol_orbit_load(const char *p, struct OlOrbit **out);

/**
 * # Safety
 * `o` must be a live handle and `p` a NUL-terminated path.
 */
enum OlStatus ol_orbit_save(const struct OlOrbit *o, const char *p);

/**
 * # Safety
 * `o` must come from an `ol_orbit_` constructor and not be freed twice. Null is ignored.
 */
void ol_orbit_free(struct OlOrbit *o);

/**
 * Number of enumerated elements and the enumeration radius.
 *
 * # Safety
 * `o` must be a live handle; `len` and `radius` writable.
 */
enum OlStatus ol_orbit_info(const struct OlOrbit *o, size_t *len, double *radius);

/**
 * Observed and predicted number of elements with `d < t`.
 *
 * # Safety
 * `o` must be a live handle; `observed` and `predicted` writable.
 */
enum OlStatus ol_count_ball(const struct OlOrbit *o,
                            double t,
                            uint64_t *observed,
                            double *predicted);

/**
 * Sector counts over `n_arcs` equal arcs starting at `offset`. Points are
 * counted once per orbit point when `point_mode` is set.
 *
 * # Safety
 * `observed` and `predicted` must each have room for `n_arcs` values.
 */
enum OlStatus ol_count_sector(const struct OlOrbit *o,
                              size_t n_arcs,
                              double offset,
                              double t,
                              bool point_mode,
                              uint64_t *observed,
                              double *predicted);

/**
 * Reduces `m` (row-major `SL(2)`) into the standard fundamental domain:
 * `word * m = rep` with `word` in `PSL(2,Z)`, and `z = rep * i`.
 *
 * # Safety
 * `m` must hold 4 values, `word` room for 4 and `z` room for 2.
 */
enum OlStatus ol_reduce(const double *m, int64_t *word, double *z);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORBITLAB_H */
