#ifndef LIGHTLATTICE_H
#define LIGHTLATTICE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LlStatus {
  LL_STATUS_OK = 0,
  LL_STATUS_NULL_POINTER = 1,
  LL_STATUS_INVALID_INPUT = 2,
  LL_STATUS_NEGATIVE_DISTANCE = 3,
  LL_STATUS_SINGULAR_BOUNDARY = 4,
  LL_STATUS_NO_CONVERGENCE = 5,
  LL_STATUS_NUMERICAL = 6,
  LL_STATUS_PANIC = 7,
} LlStatus;

// Opaque chain of scatterers plus its light modes.
typedef struct LlSystem LlSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a chain of `n` scatterers with uniform coupling, placed at
// `0, 1, ..., n-1` (internal length units). Returns null on invalid input.
struct LlSystem *ll_system_new(size_t n, double zeta_re, double zeta_im);

// # Safety
// `system` must come from [`ll_system_new`] and not be used afterwards.
void ll_system_free(struct LlSystem *system);

// Adds a mode with wavenumber `k` (units of `k_ref`) driven from either side.
//
// # Safety
// `system` must be a live handle.
enum LlStatus ll_system_add_mode(struct LlSystem *system,
                                 double k,
                                 double intensity_left,
                                 double intensity_right,
                                 double phase_left,
                                 double phase_right);

// Number of scatterers.
//
// # Safety
// `system` must be a live handle or null.
size_t ll_system_len(const struct LlSystem *system);

// Replaces the positions; `n` must equal the chain length and positions must increase.
//
// # Safety
// `positions` must point to `n` readable doubles.
enum LlStatus ll_system_set_positions(struct LlSystem *system, const double *positions, size_t n);

// Copies the current positions into `out` (length `n`).
//
// # Safety
// `out` must point to `n` writable doubles.
enum LlStatus ll_system_positions(const struct LlSystem *system, double *out, size_t n);

// Total force on each scatterer, summed over modes.
//
// # Safety
// `out` must point to `n` writable doubles.
enum LlStatus ll_system_forces(const struct LlSystem *system, double *out, size_t n);

// Reflection and transmission amplitudes `[re, im]` of mode `mode` for light from the left.
//
// # Safety
// `r` and `t` must each point to two writable doubles.
enum LlStatus ll_system_reflection_transmission(const struct LlSystem *system,
                                                size_t mode,
                                                double *r,
                                                double *t);

// Total intensity of all modes at the `m` points `xs`.
//
// # Safety
// `xs` must point to `m` readable and `out` to `m` writable doubles.
enum LlStatus ll_system_intensity(const struct LlSystem *system,
                                  const double *xs,
                                  double *out,
                                  size_t m);

// Moves the chain to a nearby stationary configuration. With `relative`
// nonzero only the gaps are required to be stationary. The final residual
// is written to `residual` when it is not null.
//
// # Safety
// `system` must be a live handle; `residual` may be null.
enum LlStatus ll_system_relax(struct LlSystem *system, int32_t relative, double *residual);

// Self-consistent lattice constant `k d` of a standing-wave lattice.
//
// # Safety
// `out` must point to one writable double.
enum LlStatus ll_lattice_constant(double zeta, double asymmetry, double *out);

// Leading-order forces on a pair at separation `d` lit by two counter-propagating modes.
//
// # Safety
// `f1` and `f2` must each point to one writable double.
enum LlStatus ll_pair_forces_approx(double d,
                                    double intensity_ratio,
                                    double k_y,
                                    double k_z,
                                    double zeta,
                                    double i_y,
                                    double *f1,
                                    double *f2);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length, 0 when there is none.
//
// # Safety
// `buf` must point to `len` writable bytes or be null.
size_t ll_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ll_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIGHTLATTICE_H */
