#ifndef ATTODELAY_H
#define ATTODELAY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call; 0 is success.
 */
typedef enum {
  ATTO_STATUS_OK = 0,
  ATTO_STATUS_NULL_POINTER = 1,
  ATTO_STATUS_UTF8 = 2,
  ATTO_STATUS_DOMAIN = 3,
  ATTO_STATUS_BARRIER_SUPPRESSED = 4,
  ATTO_STATUS_PARSE = 5,
  ATTO_STATUS_EMPTY_DATASET = 6,
  ATTO_STATUS_SINGULAR_FIT = 7,
  ATTO_STATUS_INSUFFICIENT_DATA = 8,
  ATTO_STATUS_GRID_MISMATCH = 9,
  ATTO_STATUS_UNIT_MISMATCH = 10,
  ATTO_STATUS_IO = 11,
  ATTO_STATUS_INTERNAL = 12,
} AttoStatus;

/**
 * Opaque delay dataset; create with atto_dataset_read or atto_dataset_synth
 * and release with atto_dataset_free.
 */
typedef struct AttoDataset AttoDataset;

/**
 * Barrier geometry under a static field, atomic units.
 */
typedef struct {
  double f;
  double f_a;
  double delta_z;
  double d_b;
  double x_minus;
  double x_plus;
  double x_m;
  double d_c;
} AttoBarrierGeometry;

/**
 * Delay components at one field strength, atomic units of time.
 */
typedef struct {
  double tau_a;
  double tau_dion;
  double tau_db;
  double tau_td;
  double tau_ti;
  double xi;
  double lambda;
} AttoDelayBreakdown;

/**
 * Weighted least-squares fit of delay data in a 1/F basis.
 * basis: 0 = a/F, 1 = a/F + b. time_unit: 0 = atomic, 1 = attoseconds.
 */
typedef struct {
  int basis;
  double a;
  double b;
  double cov_aa;
  double cov_ab;
  double cov_bb;
  double rss;
  size_t dof;
  double f_min;
  double f_max;
  int time_unit;
} AttoFitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread; empty if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *atto_last_error_message(void);

/**
 * Converts atomic units of time to attoseconds.
 */
double atto_au_time_to_as(double t);

/**
 * Converts attoseconds to atomic units of time.
 */
double atto_as_time_to_au(double t);

/**
 * Peak field strength in au for a laser intensity in W/cm^2.
 */
AttoStatus atto_intensity_to_field(double intensity_w_cm2, double *out_f);

/**
 * Laser intensity in W/cm^2 for a peak field strength in au.
 */
double atto_field_to_intensity(double f);

/**
 * Atomic (barrier-suppression) field strength I_p^2 / (4 Z_eff).
 */
AttoStatus atto_atomic_field_strength(double ip, double zeff, double *out_f_a);

/**
 * Weak-measurement back-reaction limit 1 / (4 I_p).
 */
AttoStatus atto_weak_measurement_backreaction(double ip, double zeff, double *out_tau);

/**
 * Combined Coulomb plus static-field potential at position x > 0.
 */
AttoStatus atto_effective_potential(double ip, double zeff, double f, double x, double *out_v);

/**
 * Barrier height I_p - 2 sqrt(Z_eff F) at the potential apex.
 */
AttoStatus atto_apex_depth(double ip, double zeff, double f, double *out_depth);

/**
 * Full barrier geometry at field strength f.
 */
AttoStatus atto_barrier_geometry(double ip,
                                 double zeff,
                                 double f,
                                 AttoBarrierGeometry *out_geometry);

/**
 * All delay components at field strength f.
 */
AttoStatus atto_delay_breakdown(double ip, double zeff, double f, AttoDelayBreakdown *out_delays);

/**
 * Barrier time delay tau_db at field strength f.
 */
AttoStatus atto_barrier_delay(double ip, double zeff, double f, double *out_tau);

/**
 * Thick-barrier ratio lambda = tau_db / tau_dion at field strength f.
 */
AttoStatus atto_thick_barrier_ratio(double ip, double zeff, double f, double *out_lambda);

/**
 * Reads a delay dataset CSV. On success the caller owns the handle and must
 * release it with atto_dataset_free.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
AttoStatus atto_dataset_read(const char *path, AttoDataset **out_dataset);

/**
 * Writes a dataset to a CSV file.
 *
 * # Safety
 * `dataset` must be a live handle from this library; `path` a valid string.
 */
AttoStatus atto_dataset_write(const AttoDataset *dataset, const char *path);

/**
 * Generates a synthetic dataset from the model.
 * model: 0 = adiabatic (tau_td), 1 = nonadiabatic (tau_dion), 2 = barrier
 * (tau_db). scale: 0 = linear grid, 1 = log grid.
 */
AttoStatus atto_dataset_synth(double ip,
                              double zeff,
                              int model,
                              double f_min,
                              double f_max,
                              size_t n,
                              int scale,
                              double noise_sigma,
                              uint64_t seed,
                              AttoDataset **out_dataset);

/**
 * Number of samples in the dataset.
 *
 * # Safety
 * `dataset` must be a live handle from this library.
 */
AttoStatus atto_dataset_len(const AttoDataset *dataset, size_t *out_len);

/**
 * Reads sample `index`. `out_sigma` receives the uncertainty when present
 * (out_has_sigma = 1) and 0 otherwise. Delays are in the dataset's time
 * unit: 0 = atomic, 1 = attoseconds, reported through out_time_unit.
 *
 * # Safety
 * `dataset` must be a live handle from this library.
 */
AttoStatus atto_dataset_sample(const AttoDataset *dataset,
                               size_t index,
                               double *out_f,
                               double *out_delay,
                               double *out_sigma,
                               int *out_has_sigma,
                               int *out_time_unit);

/**
 * Releases a dataset handle. Passing NULL is a no-op.
 *
 * # Safety
 * `dataset` must be NULL or a live handle from this library; the handle is
 * invalid afterwards.
 */
void atto_dataset_free(AttoDataset *dataset);

/**
 * Fits the dataset in the chosen basis (0 = a/F, 1 = a/F + b).
 *
 * # Safety
 * `dataset` must be a live handle from this library.
 */
AttoStatus atto_fit(const AttoDataset *dataset, int basis, AttoFitResult *out_fit);

/**
 * Evaluates a fitted curve a / f + b at field strength f > 0.
 *
 * # Safety
 * `fit_result` must point to a valid AttoFitResult.
 */
AttoStatus atto_fit_eval(const AttoFitResult *fit_result, double f, double *out_value);

/**
 * Fits both datasets in the chosen basis, evaluates them on `f_grid`
 * (length n, strictly increasing, positive), and writes adiabatic minus
 * nonadiabatic to `out_values`. `out_extrapolated[i]` is 1 where the point
 * lies outside either fitted range. Both datasets are reconciled to atomic
 * units, so the difference is in atomic units.
 *
 * # Safety
 * Handles must be live; `f_grid`, `out_values`, and `out_extrapolated` must
 * point to at least n elements.
 */
AttoStatus atto_barrier_extraction(const AttoDataset *adiabatic,
                                   const AttoDataset *nonadiabatic,
                                   int basis,
                                   const double *f_grid,
                                   size_t n,
                                   double *out_values,
                                   uint8_t *out_extrapolated);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATTODELAY_H */
