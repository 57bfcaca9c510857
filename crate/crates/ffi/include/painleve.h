#ifndef PAINLEVE_H
#define PAINLEVE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PvStatus {
  PV_STATUS_OK = 0,
  PV_STATUS_NULL_POINTER = 1,
  PV_STATUS_INVALID_INPUT = 2,
  PV_STATUS_POLE = 3,
  PV_STATUS_SINGULAR_LOCUS = 4,
  PV_STATUS_SPECTRUM = 5,
  PV_STATUS_CONSISTENCY = 6,
  PV_STATUS_OUT_OF_RANGE = 7,
  PV_STATUS_OTHER = 8,
} PvStatus;

typedef enum PvFiberClass {
  PV_FIBER_CLASS_REGULAR = 0,
  PV_FIBER_CLASS_A1 = 1,
  PV_FIBER_CLASS_A2 = 2,
  PV_FIBER_CLASS_INDETERMINATE = 3,
} PvFiberClass;

/**
 * A PIV trajectory sampled on a uniform grid.
 */
typedef struct PvTrajectory PvTrajectory;

typedef struct PvComplex {
  double re;
  double im;
} PvComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t pv_last_error(char *buf, uintptr_t len);

/**
 * `q''` from PIV at `(t, q, q')`.
 *
 * # Safety
 * `out_qpp` must be a valid pointer.
 */
enum PvStatus pv_piv_rhs(struct PvComplex t,
                         struct PvComplex q,
                         struct PvComplex qprime,
                         struct PvComplex theta0,
                         struct PvComplex theta_inf,
                         struct PvComplex *out_qpp);

/**
 * The Bäcklund image `(q̃, q̃')` for the shift `(θ0, θ∞) → (θ0 + 1, θ∞ + 1)`.
 *
 * # Safety
 * `out_q` and `out_qprime` must be valid pointers.
 */
enum PvStatus pv_backlund_q(struct PvComplex t,
                            struct PvComplex q,
                            struct PvComplex qprime,
                            struct PvComplex theta0,
                            struct PvComplex theta_inf,
                            struct PvComplex *out_q,
                            struct PvComplex *out_qprime);

/**
 * Largest coefficient of the rank-2 Lax compatibility residual along the flow.
 *
 * # Safety
 * `out_max` must be a valid pointer.
 */
enum PvStatus pv_lax_residual(struct PvComplex t,
                              struct PvComplex q,
                              struct PvComplex a0,
                              struct PvComplex theta0,
                              struct PvComplex theta_inf,
                              double *out_max);

/**
 * `(f0', f1', f2')` of the symmetric system.
 *
 * # Safety
 * `eps` and `f` must point to 3 values, `out_fdot` to 3 writable values.
 */
enum PvStatus pv_ny_rhs(const struct PvComplex *eps,
                        struct PvComplex t,
                        const struct PvComplex *f,
                        struct PvComplex *out_fdot);

/**
 * `(θ0, θ∞)` belonging to an ε-triple.
 *
 * # Safety
 * `eps` must point to 3 values; the outputs must be valid pointers.
 */
enum PvStatus pv_theta_from_eps(const struct PvComplex *eps,
                                struct PvComplex *out_theta0,
                                struct PvComplex *out_theta_inf);

/**
 * Parameter action of the extra generator.
 *
 * # Safety
 * The outputs must be valid pointers.
 */
enum PvStatus pv_missing_generator(struct PvComplex theta0,
                                   struct PvComplex theta_inf,
                                   struct PvComplex *out_theta0,
                                   struct PvComplex *out_theta_inf);

/**
 * Reducible types present at rational `(n0/d0, ninf/dinf)`; each output is 0 or 1.
 *
 * # Safety
 * The outputs must be valid pointers.
 */
enum PvStatus pv_reducible_presence(int64_t n0,
                                    int64_t d0,
                                    int64_t ninf,
                                    int64_t dinf,
                                    int32_t *out_type1,
                                    int32_t *out_type2);

/**
 * `M(x)` in row-major order, checked against the Stokes product.
 *
 * # Safety
 * `x` must point to 4 values and `out_m` to 9 writable values.
 */
enum PvStatus pv_rank3_monodromy(const struct PvComplex *x, struct PvComplex *out_m);

/**
 * `e1`, `e2` of `λ³ − e1 λ² + e2 λ − 1`.
 *
 * # Safety
 * `x` must point to 4 values; the outputs must be valid pointers.
 */
enum PvStatus pv_rank3_charpoly(const struct PvComplex *x,
                                struct PvComplex *out_e1,
                                struct PvComplex *out_e2);

/**
 * Fibre class of `x` and the number of Jordan blocks of `M(x)` (-1 when indeterminate).
 *
 * # Safety
 * `x` must point to 4 values; the outputs must be valid pointers.
 */
enum PvStatus pv_fiber_class(const struct PvComplex *x,
                             enum PvFiberClass *out_class,
                             int32_t *out_jordan_blocks);

/**
 * Six rows `(φ, d)` ordered `(0,1), (1,0), (0,2), (2,0), (1,2), (2,1)`.
 *
 * # Safety
 * Both outputs must point to 6 writable doubles.
 */
enum PvStatus pv_singular_directions(double *out_phi, double *out_d);

/**
 * Integrates PIV from `(t0, q0, q0')` to `t1`, sampling every `step` along the segment.
 * The handle is written even when a pole stops the integration early; query
 * [`pv_trajectory_completed`].
 *
 * # Safety
 * `out_handle` must be a valid pointer; release the handle with [`pv_trajectory_free`].
 */
enum PvStatus pv_piv_integrate(struct PvComplex theta0,
                               struct PvComplex theta_inf,
                               struct PvComplex t0,
                               struct PvComplex t1,
                               struct PvComplex q0,
                               struct PvComplex qprime0,
                               double tol,
                               double step,
                               struct PvTrajectory **out_handle);

/**
 * Number of samples, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
uintptr_t pv_trajectory_len(const struct PvTrajectory *h);

/**
 * 1 when the integration reached the end of the path, 0 otherwise.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
int32_t pv_trajectory_completed(const struct PvTrajectory *h);

/**
 * Sample `i` as `(t, q, q')`.
 *
 * # Safety
 * `h` must be a live handle and the outputs valid pointers.
 */
enum PvStatus pv_trajectory_sample(const struct PvTrajectory *h,
                                   uintptr_t i,
                                   struct PvComplex *out_t,
                                   struct PvComplex *out_q,
                                   struct PvComplex *out_qprime);

/**
 * Releases a trajectory. Null is ignored.
 *
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void pv_trajectory_free(struct PvTrajectory *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAINLEVE_H */
