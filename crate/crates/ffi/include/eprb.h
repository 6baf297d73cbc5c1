#ifndef EPRB_H
#define EPRB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum EprbStatus {
  EPRB_STATUS_OK = 0,
  EPRB_STATUS_NULL_POINTER = 1,
  EPRB_STATUS_INVALID_UTF8 = 2,
  EPRB_STATUS_VALIDATION = 3,
  EPRB_STATUS_NO_DATA = 4,
  EPRB_STATUS_IO = 5,
  EPRB_STATUS_PANIC = 6,
} EprbStatus;

// Measurement settings; `A`/`A'` are on the left, `B`/`B'` on the right.
typedef enum EprbSetting {
  EPRB_SETTING_A = 0,
  EPRB_SETTING_A_PRIME = 1,
  EPRB_SETTING_B = 2,
  EPRB_SETTING_B_PRIME = 3,
} EprbSetting;

// Opaque model handle.
typedef struct EprbModel EprbModel;

// Opaque table handle.
typedef struct EprbTable EprbTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until
// the next failing call on the same thread.
const char *eprb_last_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void eprb_string_free(char *s);

// Model with angles (0, 90, 45, 135) degrees, alpha 0.5 and unit normalization.
//
// # Safety
// `out` must be a valid pointer.
enum EprbStatus eprb_model_default(struct EprbModel **out);

// Model from angles in degrees, ordered A, A', B, B'.
//
// # Safety
// `out` must be a valid pointer.
enum EprbStatus eprb_model_new(double angle_a,
                               double angle_a_prime,
                               double angle_b,
                               double angle_b_prime,
                               double alpha,
                               double norm,
                               struct EprbModel **out);

// Model from `key=value` config text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum EprbStatus eprb_model_from_config(const char *text, struct EprbModel **out);

// # Safety
// `model` must come from this library and not have been freed already.
void eprb_model_free(struct EprbModel *model);

// Analytic `P(j, k)` for the joint context `(c, c2)`; `j`, `k` are +1 or -1.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum EprbStatus eprb_model_joint_prob(const struct EprbModel *model,
                                      int c,
                                      int j,
                                      int c2,
                                      int k,
                                      double *out);

// Analytic correlation for the joint context `(c, c2)`.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum EprbStatus eprb_model_correlation(const struct EprbModel *model, int c, int c2, double *out);

// Analytic CHSH block (fixed pattern, all eight variants, maximum) as JSON.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum EprbStatus eprb_model_chsh_json(const struct EprbModel *model, char **out);

// Seeded Monte Carlo run. `schedule` is `"random"` or `"fixed:AB"` etc.;
// `threads` of 0 uses the default pool.
//
// # Safety
// `model` must be a live handle, `schedule` a NUL-terminated string and
// `out` a valid pointer.
enum EprbStatus eprb_simulate(const struct EprbModel *model,
                              size_t runs,
                              uint64_t seed,
                              const char *schedule,
                              size_t threads,
                              struct EprbTable **out);

// Table from runs-CSV text.
//
// # Safety
// `csv` must be a NUL-terminated string and `out` a valid pointer.
enum EprbStatus eprb_table_from_csv(const char *csv, struct EprbTable **out);

// # Safety
// `table` must come from this library and not have been freed already.
void eprb_table_free(struct EprbTable *table);

// Number of runs, or 0 for NULL.
//
// # Safety
// `table` must be NULL or a live handle.
size_t eprb_table_len(const struct EprbTable *table);

// Table as runs-CSV text.
//
// # Safety
// `table` must be a live handle and `out` a valid pointer.
enum EprbStatus eprb_table_to_csv(const struct EprbTable *table, char **out);

// Full analysis report as JSON.
//
// # Safety
// `table` must be a live handle and `out` a valid pointer.
enum EprbStatus eprb_table_analyze_json(const struct EprbTable *table, char **out);

// Polytope membership for the contextual tables of an analysis report.
// Writes `{"feasible": ..., "witness": ..., "certificate": ...}`.
//
// # Safety
// `report_json` must be a NUL-terminated string and `out` a valid pointer.
enum EprbStatus eprb_polytope_json(const char *report_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPRB_H */
