#ifndef GL2REP_H
#define GL2REP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Gl2Status {
  GL2_STATUS_OK = 0,
  GL2_STATUS_NULL_POINTER = 1,
  GL2_STATUS_MALFORMED_INPUT = 2,
  GL2_STATUS_DOMAIN = 3,
  GL2_STATUS_PRECISION = 4,
  GL2_STATUS_UNSUPPORTED = 5,
  GL2_STATUS_CAPACITY = 6,
  GL2_STATUS_CONSISTENCY = 7,
  GL2_STATUS_PANIC = 8,
} Gl2Status;

typedef enum Gl2Family {
  GL2_FAMILY_K = 0,
  GL2_FAMILY_K0 = 1,
  GL2_FAMILY_K1 = 2,
  GL2_FAMILY_KN = 3,
  GL2_FAMILY_K1PN = 4,
  GL2_FAMILY_T1 = 5,
  GL2_FAMILY_H = 6,
  GL2_FAMILY_Z1 = 7,
} Gl2Family;

// Opaque matrix over `F_p`.
typedef struct Gl2Matrix Gl2Matrix;

// Opaque truncated quotient `π(r, λ, ω^a)^{(m)}`.
typedef struct Gl2PiTruncation Gl2PiTruncation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into this library on the same thread.
const char *gl2_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gl2_version(void);

// `|K_0(p^n) \ K / K_0(p^n)|`.
enum Gl2Status gl2_double_coset_count(uint32_t p, uint32_t n, size_t *out);

// `dim Ind_{K_0(p^n)}^K σ_n` for `σ = Sym^r`.
enum Gl2Status gl2_induced_dim(uint32_t p, uint32_t r, uint32_t n, size_t *out);

// Builds `π(r, λ, ω^a)^{(m)}` at precision `precision` (0 selects `m + 3`).
enum Gl2Status gl2_pi_truncation_new(uint32_t p,
                                     uint32_t r,
                                     uint32_t lambda,
                                     uint32_t a,
                                     uint32_t m,
                                     uint32_t precision,
                                     struct Gl2PiTruncation **out);

enum Gl2Status gl2_pi_truncation_dim(const struct Gl2PiTruncation *h, size_t *out);

// `dim R̄_k` inside the truncation.
enum Gl2Status gl2_pi_truncation_bar_r_dim(const struct Gl2PiTruncation *h,
                                           uint32_t k,
                                           size_t *out);

// Invariant dimension under the subgroup `family` of level `n`; the
// truncation must have `m >= n + 1`.
enum Gl2Status gl2_invariant_dim(const struct Gl2PiTruncation *h,
                                 enum Gl2Family family,
                                 uint32_t n,
                                 uint64_t seed,
                                 size_t *out);

// # Safety
// `h` is null or a handle from [`gl2_pi_truncation_new`] not yet freed.
void gl2_pi_truncation_free(struct Gl2PiTruncation *h);

// Copies a row-major `rows x cols` array of residues (reduced mod `p`).
//
// # Safety
// `data` points at `rows * cols` readable values, or is null when that
// product is zero.
enum Gl2Status gl2_matrix_new(uint32_t p,
                              size_t rows,
                              size_t cols,
                              const uint32_t *data,
                              struct Gl2Matrix **out);

enum Gl2Status gl2_matrix_rank(const struct Gl2Matrix *h, size_t *out);

// Dimension of the right kernel.
enum Gl2Status gl2_matrix_nullity(const struct Gl2Matrix *h, size_t *out);

// `(dim H^0, dim H^1)` of `Z_p` acting through the unipotent matrix `h`.
enum Gl2Status gl2_zp_cohomology(const struct Gl2Matrix *h, size_t *h0, size_t *h1);

// # Safety
// `h` is null or a handle from [`gl2_matrix_new`] not yet freed.
void gl2_matrix_free(struct Gl2Matrix *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GL2REP_H */
