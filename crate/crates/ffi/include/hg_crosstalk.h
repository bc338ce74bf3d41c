#ifndef HG_CROSSTALK_H
#define HG_CROSSTALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HgStatus {
  HG_STATUS_OK = 0,
  HG_STATUS_NULL_POINTER = 1,
  HG_STATUS_DOMAIN = 2,
  HG_STATUS_POLE = 3,
  HG_STATUS_NUMERICAL_REGIME = 4,
  HG_STATUS_NUMERICAL_FAILURE = 5,
  HG_STATUS_CALIBRATION = 6,
  HG_STATUS_QUADRATURE = 7,
  HG_STATUS_INVALID_PARAMETER = 8,
  HG_STATUS_OUT_OF_RANGE = 9,
  HG_STATUS_PANIC = 10,
} HgStatus;

// How the `value` argument of [`hg_channel_new`] is interpreted.
typedef enum HgTurbulenceKind {
  // No turbulence; `value` is ignored.
  HG_TURBULENCE_KIND_VACUUM = 0,
  // Structure constant Cn² [m^-2/3].
  HG_TURBULENCE_KIND_CN2 = 1,
  // Rytov variance σ_R².
  HG_TURBULENCE_KIND_RYTOV = 2,
  // Kernel strength γ.
  HG_TURBULENCE_KIND_GAMMA = 3,
} HgTurbulenceKind;

// Opaque channel: geometry, turbulence and a memoised Π table.
typedef struct HgChannel HgChannel;

// Opaque probability matrix.
typedef struct HgMatrix HgMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a channel. `pump_waist` is the pump spot size at the crystal W0p [m];
// `kind` is one of the `HgTurbulenceKind` values and selects how `value` is read.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle pointer.
enum HgStatus hg_channel_new(double wavelength,
                             double distance,
                             double pump_waist,
                             uint32_t kind,
                             double value,
                             struct HgChannel **out);

// Releases a channel. Null is ignored.
//
// # Safety
// `channel` must be null or a handle from [`hg_channel_new`] not yet freed.
void hg_channel_free(struct HgChannel *channel);

// Turbulence strength γ of the channel.
//
// # Safety
// `channel` must be a live handle, `out` writable.
enum HgStatus hg_channel_gamma(const struct HgChannel *channel, double *out);

// One-axis factor Π(μ, ν).
//
// # Safety
// `channel` must be a live handle, `out` writable.
enum HgStatus hg_pi_factor(const struct HgChannel *channel, uint32_t mu, uint32_t nu, double *out);

// Unnormalised joint probability P(HG_{m_s n_s}, HG_{m_i n_i}).
//
// # Safety
// `channel` must be a live handle, `out` writable.
enum HgStatus hg_joint_probability(const struct HgChannel *channel,
                                   uint32_t m_s,
                                   uint32_t n_s,
                                   uint32_t m_i,
                                   uint32_t n_i,
                                   double *out);

// Factor that maps raw probabilities onto the calibrated scale.
//
// # Safety
// `channel` must be a live handle, `out` writable.
enum HgStatus hg_calibration_scale(const struct HgChannel *channel, double *out);

// Matrix over all modes with m+n ≤ `max_sum`, in ascending total order.
//
// # Safety
// `channel` must be a live handle, `out` writable.
enum HgStatus hg_matrix_new(const struct HgChannel *channel,
                            uint32_t max_sum,
                            bool calibrated,
                            struct HgMatrix **out);

// Matrix over the modes (m[k], n[k]), k < len.
//
// # Safety
// `m` and `n` must each point to `len` readable values; `out` writable.
enum HgStatus hg_matrix_from_modes(const struct HgChannel *channel,
                                   const uint32_t *m,
                                   const uint32_t *n,
                                   size_t len,
                                   bool calibrated,
                                   struct HgMatrix **out);

// Releases a matrix. Null is ignored.
//
// # Safety
// `matrix` must be null or a handle from this library not yet freed.
void hg_matrix_free(struct HgMatrix *matrix);

// Number of rows (= columns). Returns 0 for a null handle.
//
// # Safety
// `matrix` must be null or a live handle.
size_t hg_matrix_dim(const struct HgMatrix *matrix);

// Entry (row = signal, column = idler).
//
// # Safety
// `matrix` must be a live handle, `out` writable.
enum HgStatus hg_matrix_get(const struct HgMatrix *matrix, size_t row, size_t col, double *out);

// Mode (m, n) labelling row/column `index`.
//
// # Safety
// `matrix` must be a live handle, `m` and `n` writable.
enum HgStatus hg_matrix_mode(const struct HgMatrix *matrix, size_t index, uint32_t *m, uint32_t *n);

// Copies the matrix row-major into `buffer`, which must hold dim² values.
//
// # Safety
// `matrix` must be a live handle and `buffer` writable for `len` doubles.
enum HgStatus hg_matrix_copy(const struct HgMatrix *matrix, double *buffer, size_t len);

// σ_R² = 1.23 Cn² k^{7/6} z^{11/6}.
//
// # Safety
// `out` must be writable.
enum HgStatus hg_rytov_variance(double cn2, double wavelength, double distance, double *out);

// γ = 1.63 (σ_R²)^{6/5}.
//
// # Safety
// `out` must be writable.
enum HgStatus hg_turbulence_strength(double rytov, double *out);

// Static description of a status code.
const char *hg_status_message(enum HgStatus status);

// Detail of the last failure on this thread, or null if none. Valid until
// the next failing call on the same thread.
const char *hg_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HG_CROSSTALK_H */
