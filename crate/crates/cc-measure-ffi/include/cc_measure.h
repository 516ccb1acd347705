#ifndef CC_MEASURE_H
#define CC_MEASURE_H

/* Generated by cbindgen from cc-measure-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum CcmStatus {
  CcmStatusOk = 0,
  CcmStatusNullPointer = 1,
  CcmStatusInvalidInput = 2,
  CcmStatusDimensionMismatch = 3,
  CcmStatusSolverFailed = 4,
  CcmStatusNotConverged = 5,
  CcmStatusInternal = 6,
} CcmStatus;

/**
 * Opaque curve handle.
 */
typedef struct CcmCurve CcmCurve;

/**
 * Opaque space handle.
 */
typedef struct CcmSpace CcmSpace;

/**
 * A distance value with its uncertainty; `is_exact` is 1 for exact
 * engines and 0 for certified upper bounds.
 */
typedef struct CcmDistance {
  double value;
  double gap;
  uint8_t is_exact;
} CcmDistance;

/**
 * A degree-k derivative estimate.
 */
typedef struct CcmMeas {
  double value;
  double spread;
  double gap_rel;
  uint8_t converged;
} CcmMeas;

/**
 * The four quantities compared by the verification harness.
 */
typedef struct CcmVerifyReport {
  double length_k;
  double hausdorff_upper;
  double spherical_upper;
  double complexity;
  uint8_t verdict;
} CcmVerifyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *ccm_status_message(enum CcmStatus status);

/**
 * Euclidean space of dimension `n`; null when `n` is zero.
 */
struct CcmSpace *ccm_space_euclidean(uintptr_t n);

struct CcmSpace *ccm_space_heisenberg(void);

/**
 * Engel space with explicit solver settings; pass zeros for defaults.
 * Returns null when the configuration is invalid.
 */
struct CcmSpace *ccm_space_engel(uintptr_t nodes,
                                 uintptr_t restarts,
                                 double penalty_weight,
                                 double tolerance,
                                 uintptr_t max_iterations,
                                 uint64_t seed);

/**
 * Frees a space handle; null is ignored.
 *
 * # Safety
 * `space` must be a pointer returned by one of the `ccm_space_*`
 * constructors that has not been freed yet.
 */
void ccm_space_free(struct CcmSpace *space);

/**
 * Ambient dimension of the space, 0 for null.
 *
 * # Safety
 * `space` must be a live handle or null.
 */
uintptr_t ccm_space_dim(const struct CcmSpace *space);

/**
 * Carnot-Caratheodory (or Euclidean) distance between coordinate arrays
 * `p` and `q` of length `len`.
 *
 * # Safety
 * `space` must be a live handle; `p` and `q` must point to `len` doubles;
 * `out` must be a valid destination.
 */
enum CcmStatus ccm_distance(const struct CcmSpace *space,
                            const double *p,
                            const double *q,
                            uintptr_t len,
                            struct CcmDistance *out);

/**
 * The vertical Heisenberg curve `t -> (0, 0, t)` on `[a, b]`.
 */
struct CcmCurve *ccm_curve_heisenberg_vertical(double a, double b);

struct CcmCurve *ccm_curve_engel_z_axis(double a, double b);

struct CcmCurve *ccm_curve_engel_w_axis(double a, double b);

/**
 * Euclidean segment `t -> t v` with velocity array `v` of length `n`.
 *
 * # Safety
 * `v` must point to `n` doubles.
 */
struct CcmCurve *ccm_curve_euclidean_segment(const double *v, uintptr_t n, double a, double b);

/**
 * The Engel curve `(0, 0, W(t), phi_slope * t)` with a truncated
 * Weierstrass `W`; returns null unless the Holder exponent exceeds 2/3.
 */
struct CcmCurve *ccm_curve_engel_weierstrass(double alpha,
                                             double beta,
                                             double phi_slope,
                                             double a,
                                             double b);

/**
 * Frees a curve handle; null is ignored.
 *
 * # Safety
 * `curve` must be a pointer returned by a `ccm_curve_*` constructor that
 * has not been freed yet.
 */
void ccm_curve_free(struct CcmCurve *curve);

/**
 * Degree-k derivative estimate at time `t` with the default scale ladder.
 *
 * # Safety
 * `space` and `curve` must be live handles, `out` a valid destination.
 */
enum CcmStatus ccm_meas_k(const struct CcmSpace *space,
                          const struct CcmCurve *curve,
                          double t,
                          double k,
                          struct CcmMeas *out);

/**
 * Log-log degree detector at time `t`; an infinite `k_hat` marks a
 * locally constant curve.
 *
 * # Safety
 * `space` and `curve` must be live handles; outputs must be valid.
 */
enum CcmStatus ccm_degree(const struct CcmSpace *space,
                          const struct CcmCurve *curve,
                          double t,
                          double *k_hat,
                          double *fit_residual);

/**
 * k-length over a uniform quadrature grid of `grid_n` points.
 *
 * # Safety
 * `space` and `curve` must be live handles; `out` must be valid.
 */
enum CcmStatus ccm_length_k(const struct CcmSpace *space,
                            const struct CcmCurve *curve,
                            double k,
                            uintptr_t grid_n,
                            double *out);

/**
 * Four-way verification over a decreasing epsilon schedule.
 *
 * # Safety
 * `space` and `curve` must be live handles; `eps` must point to
 * `eps_len` doubles; `out` must be valid.
 */
enum CcmStatus ccm_verify_main_theorem(const struct CcmSpace *space,
                                       const struct CcmCurve *curve,
                                       double k,
                                       const double *eps,
                                       uintptr_t eps_len,
                                       struct CcmVerifyReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CC_MEASURE_H */
