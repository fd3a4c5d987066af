#ifndef KCI_H
#define KCI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KciStatus {
  KCI_STATUS_OK = 0,
  /**
   * Bad parameters, including a threshold not met.
   */
  KCI_STATUS_INVALID = 1,
  /**
   * Blow-up, non-convergence or a failed root bracket.
   */
  KCI_STATUS_NUMERICAL = 2,
  KCI_STATUS_NULL_POINTER = 3,
  KCI_STATUS_IO = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  KCI_STATUS_PANIC = 5,
} KciStatus;

typedef enum KciProblemKind {
  KCI_PROBLEM_KIND_NONLOCAL = 0,
  KCI_PROBLEM_KIND_TIME_CHANGED = 1,
  KCI_PROBLEM_KIND_AUTONOMOUS = 2,
} KciProblemKind;

typedef struct KciProblem KciProblem;

/**
 * Grid values on `(0, L)` at the interior nodes.
 */
typedef struct KciProfile KciProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Owned by the
 * library; valid until the next failing call on the same thread.
 */
const char *kci_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kci_version(void);

/**
 * Copies `len` values into a new profile on the grid with `len` interior
 * nodes of `(0, length)`.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum KciStatus kci_profile_new(const double *values,
                               size_t len,
                               double length,
                               struct KciProfile **out);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void kci_profile_free(struct KciProfile *p);

/**
 * Number of nodes, 0 for null.
 *
 * # Safety
 * `p` must be null or a live profile.
 */
size_t kci_profile_len(const struct KciProfile *p);

/**
 * Copies at most `cap` values into `buf`.
 *
 * # Safety
 * `p` must be a live profile and `buf` must hold `cap` doubles.
 */
enum KciStatus kci_profile_values(const struct KciProfile *p, double *buf, size_t cap);

/**
 * `‖u_x‖²`, computed spectrally.
 *
 * # Safety
 * `p` must be a live profile and `out` writable.
 */
enum KciStatus kci_profile_h10_norm_sq(const struct KciProfile *p, double *out);

/**
 * Builds a problem from descriptor strings (`saturating`, `constant:1`,
 * `sinusoidal:1,2`, ...). For the autonomous kind `beta` must be constant.
 *
 * # Safety
 * `a` and `beta` must be NUL-terminated strings; `out` writable.
 */
enum KciStatus kci_problem_new(enum KciProblemKind kind,
                               double lambda,
                               const char *a,
                               const char *beta,
                               struct KciProblem **out);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void kci_problem_free(struct KciProblem *p);

/**
 * `S(t, s)u0` with step `dt`; the result is a new profile.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum KciStatus kci_evolve(const struct KciProfile *u0,
                          double s,
                          double t,
                          const struct KciProblem *problem,
                          double dt,
                          struct KciProfile **out);

/**
 * Number of equilibria of the autonomous problem on `n` nodes of `(0, π)`.
 *
 * # Safety
 * `a` must be a NUL-terminated string; `out` writable.
 */
enum KciStatus kci_equilibria_count(double lambda, double b, const char *a, size_t n, size_t *out);

/**
 * The positive-first `j`-arch equilibrium and its Kirchhoff value `c*`.
 *
 * # Safety
 * `a` must be a NUL-terminated string; `out` and `c_star` writable
 * (`c_star` may be null).
 */
enum KciStatus kci_equilibrium(double lambda,
                               double b,
                               const char *a,
                               size_t j,
                               size_t n,
                               struct KciProfile **out,
                               double *c_star);

/**
 * Largest ordering violation of the comparison sandwich started from
 * `lower ≤ middle ≤ upper` over `[s, t]`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum KciStatus kci_sandwich_violation(const struct KciProfile *lower,
                                      const struct KciProfile *middle,
                                      const struct KciProfile *upper,
                                      double s,
                                      double t,
                                      const struct KciProblem *problem,
                                      double dt,
                                      double *out);

/**
 * Runs the command line with `argv[0..argc]` and returns its exit code.
 *
 * # Safety
 * `argv` must hold `argc` NUL-terminated strings.
 */
int kci_cli_run(int argc, const char *const *argv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KCI_H */
