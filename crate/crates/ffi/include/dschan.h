#ifndef DSCHAN_H
#define DSCHAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DschanStatus {
  DSCHAN_STATUS_OK = 0,
  DSCHAN_STATUS_NULL_POINTER = 1,
  DSCHAN_STATUS_INVALID_PARAMETER = 2,
  DSCHAN_STATUS_DIMENSION_MISMATCH = 3,
  DSCHAN_STATUS_INFEASIBLE = 4,
  DSCHAN_STATUS_RANK_DEFICIENT = 5,
  DSCHAN_STATUS_DEGENERATE = 6,
  DSCHAN_STATUS_IO = 7,
  DSCHAN_STATUS_FORMAT = 8,
  DSCHAN_STATUS_PANIC = 9,
} DschanStatus;

typedef enum DschanAxis {
  DSCHAN_AXIS_SNR_DB = 0,
  DSCHAN_AXIS_DOPPLER_NORM = 1,
  DSCHAN_AXIS_ANTENNAS = 2,
} DschanAxis;

typedef enum DschanPilotRule {
  DSCHAN_PILOT_RULE_FIXED = 0,
  DSCHAN_PILOT_RULE_PROPORTIONAL = 1,
} DschanPilotRule;

/**
 * Opaque experiment configuration.
 */
typedef struct DschanConfig DschanConfig;

/**
 * Outcome of one Monte-Carlo trial. `smoothed_nmse_db` is NaN when
 * `has_smoothed` is false.
 */
typedef struct DschanTrialResult {
  uint64_t seed;
  double proposed_nmse_db;
  bool has_smoothed;
  double smoothed_nmse_db;
  double ls_nmse_db;
  double mu_phi;
  bool support_hit;
} DschanTrialResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dschan_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dschan_version(void);

/**
 * Desk-scale defaults (`N = 256`, `G = 24`, `N_t = 16`).
 */
struct DschanConfig *dschan_config_desk_scale(void);

/**
 * Full-size defaults (`N = 1024`, `G = 96`, `N_t = 16`).
 */
struct DschanConfig *dschan_config_full_scale(void);

/**
 * Parse a TOML document holding the configuration fields at top level.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DschanStatus dschan_config_from_toml(const char *text, struct DschanConfig **out);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void dschan_config_free(struct DschanConfig *cfg);

/**
 * Independent copy of `cfg`, or NULL when `cfg` is NULL.
 *
 * # Safety
 * `cfg` must be NULL or a live handle.
 */
struct DschanConfig *dschan_config_clone(const struct DschanConfig *cfg);

/**
 * Receive SNR in dB; `+INFINITY` disables noise.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_snr_db(struct DschanConfig *cfg, double value);

/**
 * Maximum Doppler shift times the symbol duration.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_doppler_norm(struct DschanConfig *cfg, double value);

/**
 * Transmit antennas `N_t`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_antennas(struct DschanConfig *cfg, size_t value);

/**
 * Nonzero-pilot groups `G`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_pilot_groups(struct DschanConfig *cfg, size_t value);

/**
 * Subcarriers `N`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_subcarriers(struct DschanConfig *cfg, size_t value);

/**
 * Channel length `L`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_taps(struct DschanConfig *cfg, size_t value);

/**
 * Strong taps `K`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_strong_taps(struct DschanConfig *cfg, size_t value);

/**
 * Basis order `D` (odd).
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_bem_order(struct DschanConfig *cfg, size_t value);

/**
 * Base seed of sweeps.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_seed(struct DschanConfig *cfg, uint64_t value);

/**
 * Select whole taps across antennas instead of single rows.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum DschanStatus dschan_config_set_block_selection(struct DschanConfig *cfg, bool value);

/**
 * Run one trial with the given seed.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum DschanStatus dschan_run_trial(const struct DschanConfig *cfg,
                                   uint64_t seed,
                                   struct DschanTrialResult *out);

/**
 * Run a sweep and write the CSV table (plus its manifest) to `out_path`.
 *
 * # Safety
 * `cfg` must be a live handle, `points` must hold `n_points` values and
 * `out_path` must be a NUL-terminated path.
 */
enum DschanStatus dschan_run_sweep(const struct DschanConfig *cfg,
                                   enum DschanAxis axis,
                                   const double *points,
                                   size_t n_points,
                                   size_t trials,
                                   enum DschanPilotRule rule,
                                   const char *out_path);

/**
 * Run the operator identity suite.
 *
 * # Safety
 * `passed` and `total` must be valid pointers.
 */
enum DschanStatus dschan_verify(size_t *passed, size_t *total);

/**
 * Largest normalized inner product between distinct columns of a
 * `rows x cols` matrix.
 *
 * # Safety
 * `re` and `im` must each hold `rows * cols` values; `out` must be valid.
 */
enum DschanStatus dschan_mutual_coherence(const double *re,
                                          const double *im,
                                          size_t rows,
                                          size_t cols,
                                          double *out);

/**
 * Joint-sparse recovery of `X` from `Y = A X` with `iterations` single
 * column selections.
 *
 * `A` is `rows x cols`, `Y` is `rows x y_cols`; `x_re`/`x_im` receive the
 * `cols x y_cols` estimate and `support` the `iterations` selected column
 * indices in ascending order.
 *
 * # Safety
 * All pointers must be valid for the sizes above.
 */
enum DschanStatus dschan_somp(const double *a_re,
                              const double *a_im,
                              size_t rows,
                              size_t cols,
                              const double *y_re,
                              const double *y_im,
                              size_t y_cols,
                              size_t iterations,
                              double *x_re,
                              double *x_im,
                              size_t *support);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSCHAN_H */
