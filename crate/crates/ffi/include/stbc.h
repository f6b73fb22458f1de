#ifndef STBC_H
#define STBC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum StbcStatus {
  STBC_STATUS_OK = 0,
  STBC_STATUS_NULL_POINTER = 1,
  STBC_STATUS_INVALID_ARGUMENT = 2,
  STBC_STATUS_UNKNOWN_CODE = 3,
  STBC_STATUS_NUMERICAL = 4,
  STBC_STATUS_PANIC = 5,
  STBC_STATUS_BUFFER_TOO_SMALL = 6,
} StbcStatus;

// Opaque code handle.
typedef struct StbcCode StbcCode;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a handle for a catalogue code (`"alamouti"`, `"mido_c2"`, ...).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum StbcStatus stbc_code_new(const char *name, struct StbcCode **out);

// Releases a handle; null is ignored.
//
// # Safety
// `code` must come from [`stbc_code_new`] and not be used afterwards.
void stbc_code_free(struct StbcCode *code);

// Transmit antennas, channel uses, real dimension K and receive antennas.
//
// # Safety
// All pointers must be valid.
enum StbcStatus stbc_code_dims(const struct StbcCode *code,
                               size_t *n_t,
                               size_t *t,
                               size_t *k,
                               size_t *n_r);

// Codeword `Σ g_i B_i` as `n_t × t` interleaved complex entries.
//
// # Safety
// `g` must hold `g_len` values and `out` room for `out_len` doubles.
enum StbcStatus stbc_code_encode(const struct StbcCode *code,
                                 const int64_t *g,
                                 size_t g_len,
                                 double *out,
                                 size_t out_len);

// Fundamental parallelotope volume of the code lattice.
//
// # Safety
// Pointers must be valid.
enum StbcStatus stbc_code_volume(const struct StbcCode *code, double *out);

// Worst-case real search dimension from `samples` seeded channels.
//
// # Safety
// Pointers must be valid.
enum StbcStatus stbc_code_kappa(const struct StbcCode *code,
                                size_t samples,
                                uint64_t seed,
                                size_t *out);

// ML decision over Q-PAM coefficients. `y` is `n_r × t` and `h` is
// `n_r × n_t`, both interleaved complex; `n_r` is inferred from `h_len`.
//
// # Safety
// Arrays must hold the stated number of elements.
enum StbcStatus stbc_decode(const struct StbcCode *code,
                            const double *y,
                            size_t y_len,
                            const double *h,
                            size_t h_len,
                            uint32_t pam,
                            int64_t *out_g,
                            size_t g_len,
                            double *out_metric);

// Lower bound on the normalized minimum determinant for an order with
// the given center (`"Q"`, `"Q(sqrt2)"`, `"Q(sqrt5)"` or `custom:...`)
// and index.
//
// # Safety
// `center` must be NUL-terminated and `out` valid.
enum StbcStatus stbc_delta_bound(const char *center, uint64_t index, double *out);

// Message of the last failed call on this thread; empty after success.
// The pointer stays valid until the next call on the same thread.
const char *stbc_last_error(void);

const char *stbc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STBC_H */
