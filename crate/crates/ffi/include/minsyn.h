#ifndef MINSYN_H
#define MINSYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MinsynStatus {
  MINSYN_STATUS_OK = 0,
  MINSYN_STATUS_NULL_POINTER = 1,
  MINSYN_STATUS_DOMAIN = 2,
  MINSYN_STATUS_CONDITIONING = 3,
  MINSYN_STATUS_DEGENERATE = 4,
  MINSYN_STATUS_SHAPE = 5,
  MINSYN_STATUS_PARSE = 6,
  MINSYN_STATUS_CONFIG = 7,
  MINSYN_STATUS_IO = 8,
  MINSYN_STATUS_NUMERICAL = 9,
  MINSYN_STATUS_UNTRAINED = 10,
  MINSYN_STATUS_INVALID_STRING = 11,
  MINSYN_STATUS_INTERNAL = 12,
} MinsynStatus;

/**
 * Discrete joint distribution (opaque).
 */
typedef struct MinsynDiscreteJoint MinsynDiscreteJoint;

/**
 * Standardized Gaussian system (opaque).
 */
typedef struct MinsynGaussianSystem MinsynGaussianSystem;

/**
 * Trained model loaded from a checkpoint file (opaque).
 */
typedef struct MinsynModel MinsynModel;

typedef struct MinsynGaussianMeasures {
  double mutual_information;
  double union_information;
  double gk_synergy;
  double ci_synergy;
  double wms_synergy;
} MinsynGaussianMeasures;

typedef struct MinsynDiscreteMeasures {
  double mutual_information;
  double ci_synergy;
  double wms_synergy;
  double total_correlation;
} MinsynDiscreteMeasures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *minsyn_last_error(void);

/**
 * `rho` has `m` entries, `sigma` is the `m x m` latent correlation matrix.
 *
 * # Safety
 * `rho` and `sigma` must point to `m` and `m * m` doubles; `out` must be writable.
 */
enum MinsynStatus minsyn_gaussian_system_new(const double *rho,
                                             const double *sigma,
                                             size_t m,
                                             struct MinsynGaussianSystem **out);

/**
 * # Safety
 * `sys` must come from [`minsyn_gaussian_system_new`] and not be used afterwards.
 */
void minsyn_gaussian_system_free(struct MinsynGaussianSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle and `out` writable.
 */
enum MinsynStatus minsyn_gaussian_measures(const struct MinsynGaussianSystem *sys,
                                           struct MinsynGaussianMeasures *out);

/**
 * # Safety
 * `lo` and `hi` must be writable.
 */
enum MinsynStatus minsyn_feasible_sigma12_range(double rho1, double rho2, double *lo, double *hi);

/**
 * CI posterior of one standardized output: `weights` receives `m` values.
 *
 * # Safety
 * `rho` and `weights` must hold `m` doubles; `variance` must be writable.
 */
enum MinsynStatus minsyn_gaussian_ci_posterior(const double *rho,
                                               size_t m,
                                               double *weights,
                                               double *variance);

/**
 * `arities` lists every latent alphabet size followed by the target's;
 * `probs` is the dense table with the target varying fastest.
 *
 * # Safety
 * `arities` must hold `count` sizes, `probs` their product; `out` writable.
 */
enum MinsynStatus minsyn_discrete_joint_new(const size_t *arities,
                                            size_t count,
                                            const double *probs,
                                            size_t probs_len,
                                            struct MinsynDiscreteJoint **out);

/**
 * Parses the whitespace-separated text format (`z_1 .. z_m x p` per line).
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` writable.
 */
enum MinsynStatus minsyn_discrete_joint_parse(const char *text, struct MinsynDiscreteJoint **out);

/**
 * # Safety
 * `joint` must come from a `minsyn_discrete_joint_*` constructor.
 */
void minsyn_discrete_joint_free(struct MinsynDiscreteJoint *joint);

/**
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum MinsynStatus minsyn_discrete_measures(const struct MinsynDiscreteJoint *joint,
                                           struct MinsynDiscreteMeasures *out);

/**
 * Binary MinSyn decoder from moments: `mean_x` (`n`), `mean_z` (`m`) and
 * `mean_xz` (`n x m`, the mean of `x_i z_j`). Writes `weights` (`n x m`) and
 * `bias` (`n`).
 *
 * # Safety
 * All pointers must hold the stated number of doubles.
 */
enum MinsynStatus minsyn_binary_decoder_params(const double *mean_x,
                                               const double *mean_z,
                                               const double *mean_xz,
                                               size_t n,
                                               size_t m,
                                               double *weights,
                                               double *bias);

/**
 * ACC score in nats of `weights` (`n x m`); `layout[i]` is pixel `i`'s slot.
 *
 * # Safety
 * `weights` must hold `n * m` doubles, `layout` `n` sizes; `out` writable.
 */
enum MinsynStatus minsyn_acc_score(const double *weights,
                                   size_t n,
                                   size_t m,
                                   const size_t *layout,
                                   size_t slots,
                                   double *out);

/**
 * # Safety
 * `path` must be a nul-terminated string; `out` writable.
 */
enum MinsynStatus minsyn_model_load(const char *path, struct MinsynModel **out);

/**
 * # Safety
 * `model` must come from [`minsyn_model_load`].
 */
void minsyn_model_free(struct MinsynModel *model);

/**
 * Number of input features the model expects.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum MinsynStatus minsyn_model_inputs(const struct MinsynModel *model, size_t *out);

/**
 * Evaluation-mode reconstruction of `rows x cols` inputs into `out`.
 *
 * # Safety
 * `x` and `out` must hold `rows * cols` doubles.
 */
enum MinsynStatus minsyn_model_reconstruct(const struct MinsynModel *model,
                                           const double *x,
                                           size_t rows,
                                           size_t cols,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINSYN_H */
