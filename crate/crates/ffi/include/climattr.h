#ifndef CLIMATTR_H
#define CLIMATTR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ClimattrStatus {
  CLIMATTR_STATUS_OK = 0,
  CLIMATTR_STATUS_NULL_POINTER = 1,
  CLIMATTR_STATUS_INVALID_ARGUMENT = 2,
  CLIMATTR_STATUS_DATA_ERROR = 3,
  CLIMATTR_STATUS_NUMERICAL_ERROR = 4,
  CLIMATTR_STATUS_IO_ERROR = 5,
  CLIMATTR_STATUS_PANIC = 6,
} ClimattrStatus;

/**
 * Annual series collected before alignment.
 */
typedef struct ClimattrDataset ClimattrDataset;

typedef struct ClimattrFit ClimattrFit;

typedef struct ClimattrModel ClimattrModel;

/**
 * Summary statistics of a least-squares fit.
 */
typedef struct ClimattrFitSummary {
  double r_squared;
  double residual_sd;
  double rss;
  double condition_number;
  size_t dof;
  size_t n;
  size_t n_coefficients;
} ClimattrFitSummary;

/**
 * A scenario change with its interval and two-sided p-value.
 */
typedef struct ClimattrChange {
  double delta;
  double ci_lo;
  double ci_hi;
  double p_value;
} ClimattrChange;

typedef struct ClimattrGcResult {
  double f_statistic;
  double p_value;
  double rss_unrestricted;
  double rss_restricted;
  double dof_numerator;
  double dof_denominator;
  double gaussian_te;
  bool reject;
} ClimattrGcResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *climattr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *climattr_version(void);

/**
 * Starts a dataset from an annual response series beginning at `first_year`.
 */
enum ClimattrStatus climattr_dataset_new(const char *name,
                                         int32_t first_year,
                                         const double *values,
                                         size_t len,
                                         struct ClimattrDataset **out_dataset);

/**
 * Adds a covariate. `role` is 0 for a forced covariate, 1 for a driver.
 */
enum ClimattrStatus climattr_dataset_add_covariate(struct ClimattrDataset *dataset,
                                                   const char *name,
                                                   int32_t first_year,
                                                   const double *values,
                                                   size_t len,
                                                   int32_t role);

/**
 * Adds an auxiliary series (carried along, not regressed on).
 */
enum ClimattrStatus climattr_dataset_add_auxiliary(struct ClimattrDataset *dataset,
                                                   const char *name,
                                                   int32_t first_year,
                                                   const double *values,
                                                   size_t len);

void climattr_dataset_free(struct ClimattrDataset *dataset);

/**
 * Least squares on an n x k row-major predictor matrix. With an intercept
 * the coefficient vector has k + 1 entries, intercept first.
 */
enum ClimattrStatus climattr_ols_fit(const double *x,
                                     size_t n,
                                     size_t k,
                                     const double *y,
                                     bool with_intercept,
                                     struct ClimattrFit **out_fit);

enum ClimattrStatus climattr_fit_summary(const struct ClimattrFit *fit,
                                         struct ClimattrFitSummary *out_summary);

/**
 * Copies coefficients and their standard errors; either output may be NULL.
 * `len` must equal the number of coefficients.
 */
enum ClimattrStatus climattr_fit_coefficients(const struct ClimattrFit *fit,
                                              double *out_coefficients,
                                              double *out_std_errors,
                                              size_t len);

void climattr_fit_free(struct ClimattrFit *fit);

/**
 * Fits the counterfactual regression. `family` is 0 for Gaussian errors,
 * 1 for GEV (which always carries a location intercept).
 */
enum ClimattrStatus climattr_statcf_fit(const struct ClimattrDataset *dataset,
                                        bool include_intercept,
                                        int32_t family,
                                        struct ClimattrModel **out_model);

/**
 * `m(s2) - m(s1)` where both scenarios assign `values1[i]` / `values2[i]`
 * to covariate `names[i]`.
 */
enum ClimattrStatus climattr_model_delta(const struct ClimattrModel *model,
                                         const char *const *names,
                                         const double *values1,
                                         const double *values2,
                                         size_t len,
                                         double level,
                                         struct ClimattrChange *out_change);

void climattr_model_free(struct ClimattrModel *model);

/**
 * Conditional Granger-causality F-test on series of `dataset`.
 */
enum ClimattrStatus climattr_gc_test(const struct ClimattrDataset *dataset,
                                     const char *target,
                                     const char *const *causes,
                                     size_t n_causes,
                                     const char *const *conditioning,
                                     size_t n_conditioning,
                                     size_t order,
                                     double alpha,
                                     struct ClimattrGcResult *out_result);

/**
 * `0.5 ln(rss_restricted / rss_unrestricted)`.
 */
enum ClimattrStatus climattr_gaussian_te(double rss_restricted,
                                         double rss_unrestricted,
                                         double *out_te);

/**
 * Level exceeded with probability 1/period under GEV(mu, sigma, xi).
 */
enum ClimattrStatus climattr_gev_return_level(double mu,
                                              double sigma,
                                              double xi,
                                              double period,
                                              double *out_level);

/**
 * P(X > x) under GEV(mu, sigma, xi).
 */
enum ClimattrStatus climattr_gev_exceedance(double mu,
                                            double sigma,
                                            double xi,
                                            double x,
                                            double *out_probability);

/**
 * Runs a config file as the CLI would (`command` is one of fit, attribute,
 * granger, fingerprint, simulate, report) and writes outputs to `out_dir`.
 */
enum ClimattrStatus climattr_run_config(const char *config_path,
                                        const char *command,
                                        const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLIMATTR_H */
