/* qfourier C interface.
 *
 * All functions return a qf_status; QF_OK is zero. On failure the message of
 * the last error on the calling thread is available from qf_last_error().
 * Strings handed out by the library are released with qf_string_free.
 */
#ifndef QFOURIER_H
#define QFOURIER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef QFOURIER_BUILDING
#    define QF_API __declspec(dllexport)
#  else
#    define QF_API __declspec(dllimport)
#  endif
#else
#  define QF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qf_status {
  QF_OK = 0,
  QF_INVALID_ARGUMENT = 1,
  QF_WINDOW_TOO_SHORT = 2,
  QF_PAST_TOO_SHALLOW = 3,
  QF_INTERNAL_MISMATCH = 4,
  QF_SEARCH_BUDGET_EXHAUSTED = 5,
  QF_DEGENERATE_INPUT = 6,
  QF_IO = 7,
  QF_PARSE = 8,
  QF_INVALID_HANDLE = 9,
  QF_UNKNOWN = 99
} qf_status;

typedef enum qf_law { QF_RADEMACHER = 0, QF_STANDARD_NORMAL = 1 } qf_law;

typedef struct qf_coeffs qf_coeffs;
typedef struct qf_past qf_past;

QF_API const char* qf_version(void);
QF_API const char* qf_last_error(void);
QF_API const char* qf_status_name(qf_status status);
QF_API void qf_string_free(char* s);

/* Coefficient sequences, as the JSON object {"support", "values", "blocks"}
 * or {"dense": [...]}. */
QF_API qf_status qf_coeffs_from_json(const char* json, qf_coeffs** out);
QF_API qf_status qf_coeffs_from_dense(const double* values, size_t count, qf_coeffs** out);
QF_API qf_status qf_coeffs_to_json(const qf_coeffs* coeffs, char** out_json);
QF_API qf_status qf_coeffs_max_index(const qf_coeffs* coeffs, uint64_t* out);
QF_API void qf_coeffs_destroy(qf_coeffs* coeffs);

/* Frozen past xi_0, xi_{-1}, ..., xi_{-depth}. */
QF_API qf_status qf_past_draw(qf_law law, size_t depth, uint64_t seed, uint64_t replicate, qf_past** out);
QF_API qf_status qf_past_from_values(qf_law law, const double* back, size_t count, qf_past** out);
QF_API qf_status qf_past_depth(const qf_past* past, size_t* out);
QF_API void qf_past_destroy(qf_past* past);

/* f(theta) = sum_j a_j e^{i j theta}. */
QF_API qf_status qf_transfer_fn(const qf_coeffs* coeffs, double theta, double* re, double* im);
/* E_0 S_n(theta) for a frozen past. */
QF_API qf_status qf_conditional_dft(const qf_coeffs* coeffs, const qf_past* past, uint64_t n, double theta,
                                    double* re, double* im);
/* sigma_theta^2 = |f(theta)|^2 / 2. */
QF_API qf_status qf_sigma_theta_squared(const qf_coeffs* coeffs, double theta, double* out);

/* Experiment drivers. config_json follows the CLI config schema; artifacts go
 * to out_dir. *exit_code receives the command's exit code (0 pass, 1 fail,
 * 2 search budget exhausted). summary_json may be NULL. */
QF_API qf_status qf_run(const char* command, const char* config_json, const char* out_dir, int* exit_code,
                        char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* QFOURIER_H */
