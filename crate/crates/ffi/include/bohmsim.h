#ifndef BOHMSIM_H
#define BOHMSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every FFI call.
 */
typedef enum BohmStatus {
  BohmStatus_Ok = 0,
  BohmStatus_NullPointer = 1,
  /**
   * invalid configuration, precondition or argument
   */
  BohmStatus_InvalidArgument = 2,
  /**
   * numerical failure during the run
   */
  BohmStatus_NumericalFailure = 3,
  /**
   * a string argument was not valid UTF-8
   */
  BohmStatus_InvalidUtf8 = 4,
  /**
   * an internal panic was caught at the boundary
   */
  BohmStatus_Panic = 5,
} BohmStatus;

/**
 * Foliation handle.
 */
typedef struct BohmFoliation BohmFoliation;

/**
 * Trajectory handle: N world lines sampled leaf by leaf.
 */
typedef struct BohmTrajectory BohmTrajectory;

/**
 * Wave function handle (Dirac sector, normalized on the rest leaf).
 */
typedef struct BohmWaveFunction BohmWaveFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread; do not free it.
 */
const char *bohm_last_error_message(void);

/**
 * Build a Dirac-sector wave function from a TOML experiment config.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BohmStatus bohm_wavefunction_from_toml(const char *config_toml, struct BohmWaveFunction **out);

/**
 * Build the `[foliation]` of a TOML experiment config (the rest frame when
 * the section is absent).
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BohmStatus bohm_foliation_from_toml(const char *config_toml, struct BohmFoliation **out);

/**
 * Integrate the hypersurface guiding law from a spatial configuration on
 * `leaf(s0)` to `leaf(s1)`.
 *
 * # Safety
 * `initial_xs` must point to `particles` doubles; handles must be live.
 */
enum BohmStatus bohm_trajectory_integrate(const struct BohmWaveFunction *wf,
                                          const struct BohmFoliation *foliation,
                                          const double *initial_xs,
                                          uintptr_t particles,
                                          double s0,
                                          double s1,
                                          double ds,
                                          struct BohmTrajectory **out);

/**
 * Number of recorded leaves.
 *
 * # Safety
 * `trajectory` and `out` must be valid pointers.
 */
enum BohmStatus bohm_trajectory_leaf_count(const struct BohmTrajectory *trajectory, uintptr_t *out);

/**
 * # Safety
 * `trajectory` and `out` must be valid pointers.
 */
enum BohmStatus bohm_trajectory_particle_count(const struct BohmTrajectory *trajectory,
                                               uintptr_t *out);

/**
 * 1 when the trajectory was integrated to the end, 0 when it aborted near
 * a node (the recorded prefix is still readable).
 *
 * # Safety
 * `trajectory` and `out` must be valid pointers.
 */
enum BohmStatus bohm_trajectory_is_valid(const struct BohmTrajectory *trajectory, int32_t *out);

/**
 * Crossing point of one particle with one recorded leaf.
 *
 * # Safety
 * Pointers must be valid; `leaf` and `particle` are bounds-checked.
 */
enum BohmStatus bohm_trajectory_point(const struct BohmTrajectory *trajectory,
                                      uintptr_t leaf,
                                      uintptr_t particle,
                                      double *t_out,
                                      double *x_out);

/**
 * Hypersurface density at a spatial configuration on `leaf(s)`.
 *
 * # Safety
 * `xs` must point to `particles` doubles; handles must be live.
 */
enum BohmStatus bohm_density_on_leaf(const struct BohmWaveFunction *wf,
                                     const struct BohmFoliation *foliation,
                                     double s,
                                     const double *xs,
                                     uintptr_t particles,
                                     double *out);

/**
 * Lower probability of the `[event]` over the `[family]` of a full TOML
 * experiment config. Writes the minimum estimate, its conservative lower
 * confidence bound, and the arg-min foliation label (free it with
 * `bohm_string_free`).
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; output pointers valid.
 */
enum BohmStatus bohm_pstar_from_toml(const char *config_toml,
                                     double *value_out,
                                     double *lower_bound_out,
                                     char **argmin_out);

/**
 * # Safety
 * `s` must come from this library (e.g. `bohm_pstar_from_toml`) and not
 * have been freed already. Null is ignored.
 */
void bohm_string_free(char *s);

/**
 * # Safety
 * `wf` must come from `bohm_wavefunction_from_toml`; null is ignored.
 */
void bohm_wavefunction_free(struct BohmWaveFunction *wf);

/**
 * # Safety
 * `foliation` must come from `bohm_foliation_from_toml`; null is ignored.
 */
void bohm_foliation_free(struct BohmFoliation *foliation);

/**
 * # Safety
 * `trajectory` must come from `bohm_trajectory_integrate`; null is ignored.
 */
void bohm_trajectory_free(struct BohmTrajectory *trajectory);

/**
 * Number of particles the wave-function handle describes.
 *
 * # Safety
 * `wf` and `out` must be valid pointers.
 */
enum BohmStatus bohm_wavefunction_particle_count(const struct BohmWaveFunction *wf, uintptr_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOHMSIM_H */
