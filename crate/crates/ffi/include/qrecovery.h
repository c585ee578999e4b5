#ifndef QRECOVERY_H
#define QRECOVERY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QrStatus {
  QR_STATUS_OK = 0,
  QR_STATUS_NULL_POINTER = 1,
  QR_STATUS_INVALID_ARGUMENT = 2,
  QR_STATUS_DIMENSION_MISMATCH = 3,
  QR_STATUS_NOT_PSD = 4,
  QR_STATUS_NUMERICAL = 5,
  QR_STATUS_SOLVER = 6,
  QR_STATUS_IO = 7,
  QR_STATUS_PARSE = 8,
  QR_STATUS_PANIC = 9,
} QrStatus;

typedef enum QrWeights {
  QR_WEIGHTS_COSH = 0,
  QR_WEIGHTS_UNIFORM = 1,
} QrWeights;

// Opaque quantum channel.
typedef struct QrChannel QrChannel;

// Opaque density operator.
typedef struct QrState QrState;

// Recovery-bound quantities, information in bits. `dm_bits` and
// `delta_meas` are NaN unless requested.
typedef struct QrRecoveryReport {
  double i_bits;
  double fid;
  double neg2logf;
  double dm_bits;
  double delta_thm1;
  double delta_meas;
  double delta_cor3;
} QrRecoveryReport;

typedef struct QrOptimum {
  // Fidelity of the repaired witness channel.
  double value;
  double sdp_value;
  double dual_bound;
  // Nonzero when the solver reached full accuracy.
  int32_t optimal;
} QrOptimum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *qr_last_error(void);

// Library version as a static NUL-terminated string.
const char *qr_version(void);

// Builds a state from `n × n` row-major real and imaginary parts, where
// `n` is the product of the `n_dims` entries of `dims`. `im` may be NULL.
//
// # Safety
// `dims` must point to `n_dims` values and `re` (and `im` if non-NULL) to
// `n * n` values; `out` must be writable.
enum QrStatus qr_state_new(const size_t *dims,
                           size_t n_dims,
                           const double *re,
                           const double *im,
                           struct QrState **out);

// Loads a state JSON file (`{"dims", "matrix": [[re, im], ...]}`).
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum QrStatus qr_state_load_json(const char *path, struct QrState **out);

// # Safety
// `state` must be a live handle and `path` a NUL-terminated string.
enum QrStatus qr_state_save_json(const struct QrState *state, const char *path);

// # Safety
// `state` must be NULL or a handle not yet freed.
void qr_state_free(struct QrState *state);

// Total dimension, or 0 for NULL.
//
// # Safety
// `state` must be NULL or a live handle.
size_t qr_state_dim(const struct QrState *state);

// Number of tensor factors, or 0 for NULL.
//
// # Safety
// `state` must be NULL or a live handle.
size_t qr_state_num_systems(const struct QrState *state);

// Marginal on the `n_keep` subsystems listed in `keep`.
//
// # Safety
// `state` must be live, `keep` must hold `n_keep` values, `out` writable.
enum QrStatus qr_state_marginal(const struct QrState *state,
                                const size_t *keep,
                                size_t n_keep,
                                struct QrState **out);

// `I(A:C|B)` in bits for a state on `A ⊗ B ⊗ C`.
//
// # Safety
// `state` must be live and `out` writable.
enum QrStatus qr_cmi(const struct QrState *state, double *out);

// `‖√ρ √σ‖₁`.
//
// # Safety
// Both handles must be live and `out` writable.
enum QrStatus qr_fidelity(const struct QrState *a, const struct QrState *b, double *out);

// Transpose (Petz) map of a bipartite `ρ_BC`.
//
// # Safety
// `rho_bc` must be live and `out` writable.
enum QrStatus qr_petz_transpose(const struct QrState *rho_bc, struct QrChannel **out);

// Rotated Petz map at parameter `t`.
//
// # Safety
// `rho_bc` must be live and `out` writable.
enum QrStatus qr_rotated_petz(const struct QrState *rho_bc, double t, struct QrChannel **out);

// Average of rotated Petz maps over `nodes` points on `[−halfwidth, halfwidth]`.
//
// # Safety
// `rho_bc` must be live and `out` writable.
enum QrStatus qr_averaged_petz(const struct QrState *rho_bc,
                               size_t nodes,
                               double halfwidth,
                               enum QrWeights weights,
                               struct QrChannel **out);

// Loads a channel JSON file (`{"dim_in", "dim_out", "choi"}`).
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum QrStatus qr_channel_load_json(const char *path, struct QrChannel **out);

// # Safety
// `chan` must be live and `path` a NUL-terminated string.
enum QrStatus qr_channel_save_json(const struct QrChannel *chan, const char *path);

// # Safety
// `chan` must be NULL or a handle not yet freed.
void qr_channel_free(struct QrChannel *chan);

// Input and output dimensions.
//
// # Safety
// `chan` must be live; the out pointers writable.
enum QrStatus qr_channel_dims(const struct QrChannel *chan, size_t *dim_in, size_t *dim_out);

// Writes 1 to `out` when the channel is CPTP at the library tolerance.
//
// # Safety
// `chan` must be live and `out` writable.
enum QrStatus qr_channel_is_tpcp(const struct QrChannel *chan, int32_t *out);

// Applies the channel to a single-system operator given row-major, writing
// `dim_out²` entries into `out_re` / `out_im`.
//
// # Safety
// `re` and `im` must hold `dim_in²` values, `out_re` and `out_im` room for
// `dim_out²`; `im` may be NULL.
enum QrStatus qr_channel_apply(const struct QrChannel *chan,
                               const double *re,
                               const double *im,
                               double *out_re,
                               double *out_im);

// Recovery-bound report of `chan` (mapping `B → BC`) on `ρ_ABC`.
//
// # Safety
// Handles must be live and `out` writable.
enum QrStatus qr_recovery_report(const struct QrState *rho_abc,
                                 const struct QrChannel *chan,
                                 int32_t with_dm,
                                 struct QrRecoveryReport *out);

// Fidelity of recovery by semidefinite programming. `witness` may be NULL;
// otherwise it receives the optimal channel.
//
// # Safety
// `rho_abc` must be live and `out` writable.
enum QrStatus qr_fidelity_of_recovery(const struct QrState *rho_abc,
                                      struct QrOptimum *out,
                                      struct QrChannel **witness);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRECOVERY_H */
