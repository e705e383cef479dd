#ifndef SPECBISECT_H
#define SPECBISECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  /*
   Bad dimensions, out-of-range values, non-Hermitian input.
   */
  SB_STATUS_INVALID_ARGUMENT = 2,
  /*
   Precision gate or other precondition failed.
   */
  SB_STATUS_PRECONDITION = 3,
  SB_STATUS_NON_CONVERGENCE = 4,
  SB_STATUS_INVARIANT = 5,
  SB_STATUS_ALL_ATTEMPTS_FAILED = 6,
  SB_STATUS_IO = 7,
  SB_STATUS_PARSE = 8,
  /*
   A Rust panic was caught at the boundary.
   */
  SB_STATUS_PANIC = 9,
} SbStatus;

/*
 Opaque eigendecomposition `A = U diag(d) U*`.
 */
typedef struct SbEigh SbEigh;

/*
 Opaque matrix of complex configurable-precision entries.
 */
typedef struct SbMatrix SbMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message (NUL-terminated, truncated to `len`)
 into `buf` and returns the full message length.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t sb_last_error(char *buf, size_t len);

/*
 Builds a `rows x cols` matrix from row-major real and imaginary parts,
 each rounded to `bits` mantissa bits. `im` may be null for a real matrix.

 # Safety
 `re` (and `im` if non-null) must point to `rows * cols` doubles; `out`
 must be a valid pointer.
 */
enum SbStatus sb_matrix_from_f64(size_t rows,
                                 size_t cols,
                                 const double *re,
                                 const double *im,
                                 uint32_t bits,
                                 struct SbMatrix **out);

/*
 Reads a matrix file.

 # Safety
 `path` must be a NUL-terminated string; `out` a valid pointer.
 */
enum SbStatus sb_matrix_read(const char *path, struct SbMatrix **out);

/*
 Writes a matrix file (CSV when the name ends in `.csv`).

 # Safety
 `m` must come from this library; `path` must be NUL-terminated.
 */
enum SbStatus sb_matrix_write(const struct SbMatrix *m, const char *path);

/*
 # Safety
 `m` must be null or come from this library.
 */
size_t sb_matrix_rows(const struct SbMatrix *m);

/*
 # Safety
 `m` must be null or come from this library.
 */
size_t sb_matrix_cols(const struct SbMatrix *m);

/*
 Copies the entries, rounded to double, in row-major order. `im` may be
 null.

 # Safety
 `re` (and `im` if non-null) must point to `rows * cols` writable doubles.
 */
enum SbStatus sb_matrix_to_f64(const struct SbMatrix *m, double *re, double *im);

/*
 # Safety
 `m` must be null or come from this library, and not be freed twice.
 */
void sb_matrix_free(struct SbMatrix *m);

/*
 Eigendecomposition of the Hermitian matrix `a` to accuracy `eps` with
 failure probability at most `theta`, in `bits`-bit arithmetic.

 # Safety
 `a` must come from this library; `out` must be a valid pointer.
 */
enum SbStatus sb_eigh(const struct SbMatrix *a,
                      double eps,
                      double theta,
                      uint64_t seed,
                      uint32_t bits,
                      struct SbEigh **out);

/*
 # Safety
 `r` must be null or come from this library.
 */
size_t sb_eigh_dim(const struct SbEigh *r);

/*
 Copies the eigenvalues, rounded to double.

 # Safety
 `d` must point to `sb_eigh_dim(r)` writable doubles.
 */
enum SbStatus sb_eigh_values(const struct SbEigh *r, double *d);

/*
 Returns a new matrix handle holding the eigenvectors as columns.

 # Safety
 `r` must come from this library; `out` must be a valid pointer.
 */
enum SbStatus sb_eigh_vectors(const struct SbEigh *r, struct SbMatrix **out);

/*
 # Safety
 `r` must be null or come from this library, and not be freed twice.
 */
void sb_eigh_free(struct SbEigh *r);

/*
 Matrix sign of a Hermitian `a` with `||a|| <= b` and
 `||a^-1|| <= a_inv_norm`. `iterations` may be null.

 # Safety
 `a` must come from this library; `out` must be a valid pointer.
 */
enum SbStatus sb_sign(const struct SbMatrix *a,
                      double eps,
                      double b,
                      double a_inv_norm,
                      uint32_t bits,
                      struct SbMatrix **out,
                      size_t *iterations);

/*
 Mantissa bits sufficient for `eigh` at `(eps, theta, n)` under the
 default error model; 0 on invalid input.
 */
uint32_t sb_sufficient_bits(double eps, double theta, size_t n);

/*
 Mantissa bits below which no backward-stable solver reaches `eps`;
 0 on invalid input.
 */
uint32_t sb_necessary_bits(double eps, size_t n);

/*
 Library version as a static NUL-terminated string.
 */
const char *sb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECBISECT_H */
