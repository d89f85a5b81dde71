#ifndef SKEWNS_H
#define SKEWNS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum SkewnsStatus {
  SKEWNS_STATUS_OK = 0,
  SKEWNS_STATUS_NULL_POINTER = 1,
  /*
   Inadmissible physical input (vacuum, gamma outside (1, 2), non-unit normal).
   */
  SKEWNS_STATUS_DOMAIN = 2,
  /*
   Unparseable or inconsistent configuration.
   */
  SKEWNS_STATUS_CONFIG = 3,
  /*
   Buffer length does not match the grid.
   */
  SKEWNS_STATUS_SHAPE = 4,
  /*
   Boundary analysis at `u_n = 0` or `beta = 0`.
   */
  SKEWNS_STATUS_DEGENERATE = 5,
  /*
   A grid node left the admissible region.
   */
  SKEWNS_STATUS_INVALID_STATE = 6,
  SKEWNS_STATUS_PANIC = 7,
  SKEWNS_STATUS_INTERNAL = 8,
} SkewnsStatus;

/*
 Opaque simulation state.
 */
typedef struct SkewnsSimulation SkewnsSimulation;

/*
 One energy audit, field for field as in `energy.csv`.
 */
typedef struct SkewnsEnergyReport {
  double energy;
  double rate_measured;
  double surface_inviscid;
  double surface_viscous;
  double residual;
} SkewnsEnergyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len - 1` bytes). Returns the full message length in bytes,
 excluding the terminator. `buf` may be null to query the length.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t skewns_last_error_message(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *skewns_version(void);

/*
 `(rho, u1, u2, p)` to `(sqrt rho, sqrt rho u1, sqrt rho u2, sqrt p)`.

 # Safety
 `prim` and `out` must each point to 4 doubles.
 */
enum SkewnsStatus skewns_primitive_to_skew(const double *prim, double *out);

/*
 Inverse of [`skewns_primitive_to_skew`].

 # Safety
 `phi` and `out` must each point to 4 doubles.
 */
enum SkewnsStatus skewns_skew_to_primitive(const double *phi, double *out);

/*
 `beta = (M_n^2 - M*^2) / M_n^2`.

 # Safety
 `out` must be a valid pointer.
 */
enum SkewnsStatus skewns_beta(double gamma, double mn_sq, double *out);

/*
 Number of boundary conditions for the sign of `u_n` and `M_n^2`.
 `signs` may be null; otherwise it receives the 7 entry signs (+1 or -1).

 # Safety
 `count` must be valid; `signs` must be null or point to 7 bytes.
 */
enum SkewnsStatus skewns_count_bc(double gamma,
                                  double u_n_sign,
                                  double mn_sq,
                                  uint32_t *count,
                                  int8_t *signs);

/*
 The seven diagonal entries of the fully diagonalized boundary term at
 state `phi` on a face with unit normal `(n1, n2)`.

 # Safety
 `phi` must point to 4 doubles and `out` to 7.
 */
enum SkewnsStatus skewns_final_lambda(double gamma,
                                      double alpha_sq,
                                      const double *phi,
                                      double n1,
                                      double n2,
                                      double *out);

/*
 Creates a simulation from a JSON case description (same keys as the
 `skewns` config files; `steps`/`final_time` may be omitted).

 # Safety
 `config_json` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
 */
enum SkewnsStatus skewns_simulation_new(const char *config_json, struct SkewnsSimulation **out);

/*
 Releases a simulation. Null is ignored.

 # Safety
 `sim` must come from [`skewns_simulation_new`] and not be used afterwards.
 */
void skewns_simulation_free(struct SkewnsSimulation *sim);

/*
 Grid size, time step, current time and completed steps. Any output pointer may be null.

 # Safety
 `sim` must be a live handle; non-null outputs must be valid.
 */
enum SkewnsStatus skewns_simulation_info(const struct SkewnsSimulation *sim,
                                         size_t *nx,
                                         size_t *ny,
                                         double *dt,
                                         double *time,
                                         uint64_t *steps);

/*
 Advances `n` RK4 steps. On failure the state is left at the last good step.

 # Safety
 `sim` must be a live handle.
 */
enum SkewnsStatus skewns_simulation_step(struct SkewnsSimulation *sim, uint64_t n);

/*
 Energy audit of the current state.

 # Safety
 `sim` must be a live handle and `out` valid.
 */
enum SkewnsStatus skewns_simulation_energy(const struct SkewnsSimulation *sim,
                                           struct SkewnsEnergyReport *out);

/*
 Copies the current field into `buf` (length `4 nx ny`, component-major).

 # Safety
 `sim` must be a live handle and `buf` valid for `len` doubles.
 */
enum SkewnsStatus skewns_simulation_get_field(const struct SkewnsSimulation *sim,
                                              double *buf,
                                              size_t len);

/*
 Replaces the current field. Rejected (state unchanged) if any node is inadmissible.

 # Safety
 `sim` must be a live handle and `buf` valid for `len` doubles.
 */
enum SkewnsStatus skewns_simulation_set_field(struct SkewnsSimulation *sim,
                                              const double *buf,
                                              size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWNS_H */
