#ifndef TRADECURRENCY_H
#define TRADECURRENCY_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The nonzero values match the CLI exit codes.
 */
typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_DATA_ERROR = 1,
  TC_STATUS_PARAM_ERROR = 2,
  TC_STATUS_NON_CONVERGENCE = 3,
  TC_STATUS_NULL_POINTER = 4,
  TC_STATUS_PANIC = 5,
} TcStatus;

/**
 * Run configuration plus the strict flag.
 */
typedef struct TcConfig TcConfig;

/**
 * Trade matrix of one year.
 */
typedef struct TcMatrix TcMatrix;

/**
 * Ensemble statistics.
 */
typedef struct TcResult TcResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tc_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void tc_string_free(char *s);

/**
 * Load `year` from a flow CSV.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum TcStatus tc_matrix_from_csv(const char *path, int32_t year, struct TcMatrix **out);

/**
 * Build a matrix from `n` ISO codes and a row-major `n * n` array where
 * `flows[i * n + e]` is the money exported from `e` to `i`.
 *
 * # Safety
 * `codes` must hold `n` nul-terminated strings, `flows` `n * n` doubles,
 * and `out` must be a valid pointer.
 */
enum TcStatus tc_matrix_from_dense(int32_t year,
                                   const char *const *codes,
                                   size_t n,
                                   const double *flows,
                                   struct TcMatrix **out);

/**
 * Number of countries, 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t tc_matrix_len(const struct TcMatrix *m);

/**
 * Total trade volume M, 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
double tc_matrix_total_volume(const struct TcMatrix *m);

/**
 * ISO code of country `i`. Free the string with [`tc_string_free`].
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum TcStatus tc_matrix_country_code(const struct TcMatrix *m, size_t i, char **out);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void tc_matrix_free(struct TcMatrix *m);

/**
 * Default configuration: USD/EUR/BRI with the built-in seed groups.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TcStatus tc_config_default(struct TcConfig **out);

/**
 * Parse a TOML configuration (same keys as the CLI `--config` file).
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a valid pointer.
 */
enum TcStatus tc_config_from_toml(const char *text, struct TcConfig **out);

/**
 * # Safety
 * `c` must be a live handle.
 */
enum TcStatus tc_config_set_runs(struct TcConfig *c, size_t n_runs);

/**
 * # Safety
 * `c` must be a live handle.
 */
enum TcStatus tc_config_set_seed(struct TcConfig *c, uint64_t master_seed);

/**
 * When set, [`tc_run_ensemble`] fails with `TC_STATUS_NON_CONVERGENCE` if
 * any run misses a fixed point.
 *
 * # Safety
 * `c` must be a live handle.
 */
enum TcStatus tc_config_set_strict(struct TcConfig *c, bool strict);

/**
 * Number of currencies, 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t tc_config_currency_count(const struct TcConfig *c);

/**
 * # Safety
 * `c` must be null or a handle not yet freed.
 */
void tc_config_free(struct TcConfig *c);

/**
 * Run the ensemble described by `c` on `m`. `workers` = 0 uses the
 * default thread pool; the result does not depend on it.
 *
 * # Safety
 * `m` and `c` must be live handles and `out` a valid pointer.
 */
enum TcStatus tc_run_ensemble(const struct TcMatrix *m,
                              const struct TcConfig *c,
                              size_t workers,
                              struct TcResult **out);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
size_t tc_result_currency_count(const struct TcResult *r);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
size_t tc_result_country_count(const struct TcResult *r);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
double tc_result_convergence_rate(const struct TcResult *r);

/**
 * Copy the mean final fraction per currency into `out[0..len]`; `len`
 * must equal the currency count.
 *
 * # Safety
 * `r` must be a live handle and `out` must hold `len` doubles.
 */
enum TcStatus tc_result_mean_fractions(const struct TcResult *r, double *out, size_t len);

/**
 * Standard errors of [`tc_result_mean_fractions`].
 *
 * # Safety
 * `r` must be a live handle and `out` must hold `len` doubles.
 */
enum TcStatus tc_result_standard_errors(const struct TcResult *r, double *out, size_t len);

/**
 * Modal currency id per country, in matrix order; `len` must equal the
 * country count.
 *
 * # Safety
 * `r` must be a live handle and `out` must hold `len` bytes.
 */
enum TcStatus tc_result_modal_tcp(const struct TcResult *r, uint8_t *out, size_t len);

/**
 * Code of currency `j`. Free the string with [`tc_string_free`].
 *
 * # Safety
 * `r` must be a live handle and `out` a valid pointer.
 */
enum TcStatus tc_result_currency_code(const struct TcResult *r, size_t j, char **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void tc_result_free(struct TcResult *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRADECURRENCY_H */
