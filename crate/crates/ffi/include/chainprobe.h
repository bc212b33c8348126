#ifndef CHAINPROBE_H
#define CHAINPROBE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every `chainprobe_*` call.
 */
typedef enum ChainprobeStatus {
  ChainprobeStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  ChainprobeStatus_NullPointer = 1,
  /**
   * An argument was outside its admissible range.
   */
  ChainprobeStatus_InvalidArgument = 2,
  /**
   * The request is well-formed but degenerate (e.g. zero sensor bias).
   */
  ChainprobeStatus_DegenerateInput = 3,
  /**
   * The operation is not supported for these inputs.
   */
  ChainprobeStatus_Unsupported = 4,
  /**
   * A solver or simulation failed at runtime.
   */
  ChainprobeStatus_RuntimeError = 5,
  /**
   * An I/O failure while reading configs or writing artifacts.
   */
  ChainprobeStatus_IoError = 6,
  /**
   * A scenario config failed to parse.
   */
  ChainprobeStatus_ConfigParse = 7,
  /**
   * A scenario config parsed but failed validation.
   */
  ChainprobeStatus_ConfigInvalid = 8,
  /**
   * The config path was not valid UTF-8.
   */
  ChainprobeStatus_InvalidUtf8 = 9,
  /**
   * A panic was caught at the FFI boundary.
   */
  ChainprobeStatus_Panic = 10,
} ChainprobeStatus;

/**
 * Shape of a coverage-bounds result.
 */
typedef enum ChainprobeCoverage {
  /**
   * `[lo, hi]` is a nonempty admissible interval.
   */
  ChainprobeCoverage_Interval = 0,
  /**
   * No coverage level satisfies both sides at this premium.
   */
  ChainprobeCoverage_Empty = 1,
  /**
   * There is no residual risk to insure.
   */
  ChainprobeCoverage_NoRisk = 2,
} ChainprobeCoverage;

/**
 * Opaque handle to an analytic AROC curve.
 */
typedef struct ChainprobeArocCurve ChainprobeArocCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static null-terminated string.
 */
const char *chainprobe_version(void);

/**
 * Copy the last error message for this thread into `buf` (truncated,
 * null-terminated). Returns the full message length in bytes; zero means no
 * error has been recorded. A null `buf` only queries the length.
 */
uintptr_t chainprobe_last_error_message(char *buf, uintptr_t cap);

/**
 * Bayesian LRT threshold `tau = pi0 / pi1` for a binary reputation prior.
 */
enum ChainprobeStatus chainprobe_bayes_threshold(double pi0, double pi1, double *out_tau);

/**
 * Closed-form Gaussian accountability `(P_A, P_U)` at detectability `d`
 * and reputation ratio `tau`.
 */
enum ChainprobeStatus chainprobe_accountability_gaussian(double d,
                                                         double tau,
                                                         double *out_p_a,
                                                         double *out_p_u);

/**
 * Closed-form testing threshold `eta = e_d/2 + sigma^2 ln(tau) / (N e_d)`.
 */
enum ChainprobeStatus chainprobe_closed_form_threshold(double sensor_bias,
                                                       double noise_sigma,
                                                       uint64_t n_tests,
                                                       double tau,
                                                       double *out_eta);

/**
 * Neyman-Pearson binomial design: quantile threshold and achieved
 * false-alarm probability for `Binomial(n_trials, mu0)` at level `alpha`.
 */
enum ChainprobeStatus chainprobe_np_binomial_threshold(double mu0,
                                                       double alpha,
                                                       uint64_t n_trials,
                                                       uint64_t *out_threshold,
                                                       double *out_achieved_false_alarm);

/**
 * Shapiro AUC bounds `(1 - P_e, 1 - 2 P_e^2)` from the error probability.
 */
enum ChainprobeStatus chainprobe_auc_bounds(double p_e, double *out_lower, double *out_upper);

/**
 * Monte Carlo accountability estimate for the Gaussian sensor scenario.
 */
enum ChainprobeStatus chainprobe_monte_carlo_accountability(double sensor_bias,
                                                            double noise_sigma,
                                                            uint64_t n_tests,
                                                            double tau,
                                                            uint64_t trials,
                                                            uint64_t seed,
                                                            double *out_p_a_hat,
                                                            double *out_p_u_hat);

/**
 * Unbiased expected buyer loss `(1 - P_A) * delta_u`.
 */
enum ChainprobeStatus chainprobe_expected_loss(double delta_u, double p_a, double *out_loss);

/**
 * Maximum acceptable premium under full coverage for a prospect-theory
 * buyer: `C_I* = (1 - P_A) * lambda * delta_u^beta`.
 */
enum ChainprobeStatus chainprobe_max_premium_prospect(double delta_u,
                                                      double p_a,
                                                      double lambda,
                                                      double beta,
                                                      double zeta,
                                                      double *out_premium);

/**
 * Coverage interval for a prospect-theory buyer at a given premium.
 * `out_lo`/`out_hi` are written only when the result is an interval.
 */
enum ChainprobeStatus chainprobe_coverage_bounds_prospect(double premium,
                                                          double delta_u,
                                                          double p_a,
                                                          double lambda,
                                                          double beta,
                                                          double zeta,
                                                          enum ChainprobeCoverage *out_kind,
                                                          double *out_lo,
                                                          double *out_hi);

/**
 * Insurer profit `C_I - r * (1 - P_A) * delta_u`.
 */
enum ChainprobeStatus chainprobe_insurer_profit(double premium,
                                                double coverage,
                                                double delta_u,
                                                double p_a,
                                                double *out_profit);

/**
 * Optimal number of accountability tests for a CARA buyer under full
 * coverage at the maximum premium.
 */
enum ChainprobeStatus chainprobe_optimal_test_count(double sensor_bias,
                                                    double noise_sigma,
                                                    double tau,
                                                    double cost_per_test,
                                                    double procurement_cost,
                                                    double delta_u,
                                                    double cara_beta,
                                                    uint64_t n_max,
                                                    uint64_t *out_n,
                                                    double *out_payoff);

/**
 * Build the analytic Gaussian AROC curve at detectability `d` with
 * `grid_size` threshold points. The returned handle must be released with
 * [`chainprobe_aroc_curve_free`].
 */
enum ChainprobeStatus chainprobe_aroc_curve_new(double d,
                                                uint64_t grid_size,
                                                struct ChainprobeArocCurve **out_curve);

/**
 * Number of points on the curve (grid points plus the two exact endpoints).
 */
enum ChainprobeStatus chainprobe_aroc_curve_len(const struct ChainprobeArocCurve *curve,
                                                uint64_t *out_len);

/**
 * Read one curve point. Points are ordered by nondecreasing `P_U`.
 */
enum ChainprobeStatus chainprobe_aroc_curve_point(const struct ChainprobeArocCurve *curve,
                                                  uint64_t index,
                                                  double *out_tau,
                                                  double *out_p_u,
                                                  double *out_p_a);

/**
 * Trapezoidal area under the curve.
 */
enum ChainprobeStatus chainprobe_aroc_curve_auc(const struct ChainprobeArocCurve *curve,
                                                double *out_auc);

/**
 * Run the four curve property checks (endpoints, slope, concavity,
 * dominance); writes 1 when all pass, 0 otherwise.
 */
enum ChainprobeStatus chainprobe_aroc_curve_properties_pass(const struct ChainprobeArocCurve *curve,
                                                            uint8_t *out_pass);

/**
 * Release a curve handle. A null pointer is a no-op.
 */
void chainprobe_aroc_curve_free(struct ChainprobeArocCurve *curve);

/**
 * Run a scenario config file, writing its CSV artifacts and manifest.
 *
 * `seed_override` may be null to use the config's seed; `out_dir_override`
 * may be null to use the config's output directory. On success writes the
 * number of emitted artifacts.
 */
enum ChainprobeStatus chainprobe_run_scenario(const char *config_path,
                                              const uint64_t *seed_override,
                                              const char *out_dir_override,
                                              uint64_t *out_artifact_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAINPROBE_H */
