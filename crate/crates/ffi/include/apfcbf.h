#ifndef APFCBF_H
#define APFCBF_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApfStatus {
  APF_STATUS_OK = 0,
  APF_STATUS_NULL_POINTER = 1,
  APF_STATUS_INVALID_ARGUMENT = 2,
  APF_STATUS_INSIDE_OBSTACLE = 3,
  APF_STATUS_INFEASIBLE = 4,
  APF_STATUS_NEGATIVE_GAMMA = 5,
  APF_STATUS_INVALID_SCENARIO = 6,
  APF_STATUS_PARSE = 7,
  APF_STATUS_IO = 8,
  APF_STATUS_OUT_OF_RANGE = 9,
} ApfStatus;

typedef enum ApfSigmaKind {
  APF_SIGMA_KIND_GRAD_NORM_SQUARED = 0,
  APF_SIGMA_KIND_SCALED_VALUE = 1,
  APF_SIGMA_KIND_SCALED_NORM = 2,
} ApfSigmaKind;

typedef enum ApfGammaKind {
  APF_GAMMA_KIND_ZERO = 0,
  APF_GAMMA_KIND_SCALED_SPECIAL = 1,
} ApfGammaKind;

typedef enum ApfIntegrator {
  APF_INTEGRATOR_EULER = 0,
  APF_INTEGRATOR_RK4 = 1,
} ApfIntegrator;

typedef enum ApfControllerKind {
  APF_CONTROLLER_KIND_APF = 0,
  APF_CONTROLLER_KIND_NOMINAL_ONLY = 1,
  APF_CONTROLLER_KIND_SPECIAL_FILTER = 2,
  APF_CONTROLLER_KIND_GENERALIZED = 3,
} ApfControllerKind;

typedef enum ApfTerminal {
  APF_TERMINAL_REACHED_GOAL = 0,
  APF_TERMINAL_TIMEOUT = 1,
  APF_TERMINAL_DOMAIN_ERROR = 2,
} ApfTerminal;

/**
 * Opaque validated scenario.
 */
typedef struct ApfScenario ApfScenario;

/**
 * Opaque simulated trajectory.
 */
typedef struct ApfTrajectory ApfTrajectory;

typedef struct ApfVec2 {
  double x;
  double y;
} ApfVec2;

typedef struct ApfSigma {
  enum ApfSigmaKind kind;
  /**
   * Ignored for `GradNormSquared`.
   */
  double coef;
} ApfSigma;

typedef struct ApfGamma {
  enum ApfGammaKind kind;
  /**
   * Ignored for `Zero`.
   */
  double lambda;
  /**
   * Treat a negative Gamma as an error instead of a diagnostic.
   */
  bool strict;
} ApfGamma;

typedef struct ApfSimConfig {
  double dt;
  double t_max;
  double goal_tolerance;
  enum ApfIntegrator integrator;
} ApfSimConfig;

typedef struct ApfSample {
  double t;
  struct ApfVec2 x;
  struct ApfVec2 u;
  double h_min;
  double v;
} ApfSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *apf_last_error(void);

/**
 * Parses and validates a scenario JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ApfStatus apf_scenario_from_json(const char *json, struct ApfScenario **out);

/**
 * # Safety
 * `scenario` must come from [`apf_scenario_from_json`] and not be used
 * afterwards. Null is ignored.
 */
void apf_scenario_free(struct ApfScenario *scenario);

/**
 * # Safety
 * `scenario` must be a live handle or null.
 */
size_t apf_scenario_obstacle_count(const struct ApfScenario *scenario);

/**
 * Signed clearance to the nearest obstacle surface.
 *
 * # Safety
 * `scenario` must be a live handle and `h` a valid pointer.
 */
enum ApfStatus apf_clearance(const struct ApfScenario *scenario, struct ApfVec2 x, double *h);

/**
 * Attractive potential and its gradient. Either output may be null.
 *
 * # Safety
 * `scenario` must be a live handle; non-null outputs must be valid.
 */
enum ApfStatus apf_attractive(const struct ApfScenario *scenario,
                              struct ApfVec2 x,
                              double *value,
                              struct ApfVec2 *gradient);

/**
 * Repulsive potential of obstacle `index` and its gradient. Either output
 * may be null.
 *
 * # Safety
 * `scenario` must be a live handle; non-null outputs must be valid.
 */
enum ApfStatus apf_repulsive(const struct ApfScenario *scenario,
                             size_t index,
                             struct ApfVec2 x,
                             double *value,
                             struct ApfVec2 *gradient);

/**
 * Classical potential-field velocity command.
 *
 * # Safety
 * `scenario` must be a live handle and `u` a valid pointer.
 */
enum ApfStatus apf_apf_control(const struct ApfScenario *scenario,
                               struct ApfVec2 x,
                               struct ApfVec2 *u);

/**
 * Barrier filter equivalent to the potential-field command.
 *
 * # Safety
 * `scenario` must be a live handle and `u` a valid pointer.
 */
enum ApfStatus apf_special_filter_control(const struct ApfScenario *scenario,
                                          struct ApfVec2 x,
                                          struct ApfVec2 *u);

/**
 * Min-norm CLF nominal command.
 *
 * # Safety
 * `scenario` must be a live handle and `u` a valid pointer.
 */
enum ApfStatus apf_nominal_control(const struct ApfScenario *scenario,
                                   struct ApfVec2 x,
                                   struct ApfSigma sigma,
                                   struct ApfVec2 *u);

/**
 * Generalized controller. When `phi` is non-null it receives one value
 * per obstacle and must have room for `phi_len` entries, with `phi_len`
 * at least the obstacle count.
 *
 * # Safety
 * `scenario` must be a live handle, `u` a valid pointer and `phi` either
 * null or valid for `phi_len` writes.
 */
enum ApfStatus apf_generalized_control(const struct ApfScenario *scenario,
                                       struct ApfVec2 x,
                                       struct ApfSigma sigma,
                                       struct ApfGamma gamma,
                                       struct ApfVec2 *u,
                                       double *phi,
                                       size_t phi_len);

/**
 * Closed-form projection of `u_nom` onto `c_tilde + d.u <= 0`. `phi` may
 * be null.
 *
 * # Safety
 * `u` must be a valid pointer; `phi` null or valid.
 */
enum ApfStatus apf_safety_filter(struct ApfVec2 u_nom,
                                 double c_tilde,
                                 struct ApfVec2 d,
                                 struct ApfVec2 *u,
                                 double *phi);

/**
 * Exact projection onto `count` stacked half-spaces
 * `offsets[i] + normals[i].u <= 0` (at most 8).
 *
 * # Safety
 * `offsets` and `normals` must be valid for `count` reads (may be null
 * when `count == 0`); `u` and `feasible` must be valid pointers.
 */
enum ApfStatus apf_solve_projection(struct ApfVec2 u_nom,
                                    const double *offsets,
                                    const struct ApfVec2 *normals,
                                    size_t count,
                                    struct ApfVec2 *u,
                                    bool *feasible);

/**
 * Defaults used by the CLI: rk4, `dt = 0.01`, `t_max = 40`,
 * `goal_tolerance = 0.05`.
 */
struct ApfSimConfig apf_sim_config_default(void);

/**
 * Simulates the closed loop. `sigma` is used by the nominal-only and
 * generalized controllers, `gamma` by the generalized one.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer. The
 * returned trajectory must be released with [`apf_trajectory_free`].
 */
enum ApfStatus apf_simulate(const struct ApfScenario *scenario,
                            enum ApfControllerKind kind,
                            struct ApfSigma sigma,
                            struct ApfGamma gamma,
                            struct ApfSimConfig config,
                            struct ApfVec2 x0,
                            struct ApfTrajectory **out);

/**
 * # Safety
 * `trajectory` must be a live handle or null.
 */
size_t apf_trajectory_len(const struct ApfTrajectory *trajectory);

/**
 * # Safety
 * `trajectory` must be a live handle and `terminal` a valid pointer.
 */
enum ApfStatus apf_trajectory_terminal(const struct ApfTrajectory *trajectory,
                                       enum ApfTerminal *terminal);

/**
 * # Safety
 * `trajectory` must be a live handle and `sample` a valid pointer.
 */
enum ApfStatus apf_trajectory_sample(const struct ApfTrajectory *trajectory,
                                     size_t index,
                                     struct ApfSample *sample);

/**
 * Writes the trajectory in the CLI's CSV format.
 *
 * # Safety
 * `trajectory` must be a live handle and `path` a NUL-terminated string.
 */
enum ApfStatus apf_trajectory_write_csv(const struct ApfTrajectory *trajectory, const char *path);

/**
 * # Safety
 * `trajectory` must come from [`apf_simulate`] and not be used
 * afterwards. Null is ignored.
 */
void apf_trajectory_free(struct ApfTrajectory *trajectory);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APFCBF_H */
