#ifndef QCM_H
#define QCM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonzero values match the `qcm` exit codes.
 */
typedef enum QcmStatus {
  QCM_STATUS_OK = 0,
  QCM_STATUS_INVALID_INPUT = 2,
  QCM_STATUS_RESOURCE_LIMIT = 3,
  QCM_STATUS_UNDEFINED_AT_VALUE = 4,
  QCM_STATUS_UNSUPPORTED_SHAPE = 5,
  QCM_STATUS_NULL_POINTER = 6,
  QCM_STATUS_INTERNAL = 70,
  QCM_STATUS_PANIC = 71,
} QcmStatus;

/**
 * Second-factor form of the intervention formula.
 */
typedef enum QcmVariant {
  QCM_VARIANT_ANCESTOR_MARGINAL = 0,
  QCM_VARIANT_AS_PRINTED = 1,
} QcmVariant;

typedef struct QcmDistribution QcmDistribution;

typedef struct QcmGraph QcmGraph;

typedef struct QcmModel QcmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. Valid until the next call on this thread.
 */
const char *qcm_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void qcm_string_free(char *s);

/**
 * Parses a model from JSON text. Fiducial file paths resolve against the working directory.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QcmStatus qcm_model_from_json(const char *json, struct QcmModel **out);

/**
 * Loads a model file; fiducial paths resolve against its directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum QcmStatus qcm_model_load(const char *path, struct QcmModel **out);

/**
 * # Safety
 * `model` must be NULL or a live handle from this library.
 */
void qcm_model_free(struct QcmModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_model_to_json(const struct QcmModel *model, char **out);

/**
 * Seeded random qubit model whose derived DAG is `template`.
 *
 * # Safety
 * `template_graph` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_random_model(const struct QcmGraph *template_graph,
                                uint64_t seed,
                                struct QcmModel **out);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_model_time_reverse(const struct QcmModel *model, struct QcmModel **out);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_model_derive_graph(const struct QcmModel *model, struct QcmGraph **out);

/**
 * Intervention surgery: `node` is discarded and re-prepared in outcome `value` (0-based).
 *
 * # Safety
 * `model` must be a live handle, `node` a NUL-terminated string, `out` writable.
 */
enum QcmStatus qcm_model_intervene(const struct QcmModel *model,
                                   const char *node,
                                   size_t value,
                                   struct QcmModel **out);

/**
 * Un-measurement surgery: `node`'s measurement is removed.
 *
 * # Safety
 * `model` must be a live handle, `node` a NUL-terminated string, `out` writable.
 */
enum QcmStatus qcm_model_unmeasure(const struct QcmModel *model,
                                   const char *node,
                                   struct QcmModel **out);

/**
 * Exact joint outcome distribution of `model`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_simulate(const struct QcmModel *model, struct QcmDistribution **out);

/**
 * # Safety
 * `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum QcmStatus qcm_distribution_from_csv(const char *csv, struct QcmDistribution **out);

/**
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_distribution_to_csv(const struct QcmDistribution *dist, char **out);

/**
 * Number of variables.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_distribution_variable_count(const struct QcmDistribution *dist, size_t *out);

/**
 * Name of variable `index` (caller frees) and its number of outcomes.
 *
 * # Safety
 * `dist` must be a live handle; `name` and `outcomes` must be writable.
 */
enum QcmStatus qcm_distribution_variable(const struct QcmDistribution *dist,
                                         size_t index,
                                         char **name,
                                         size_t *outcomes);

/**
 * Row-major probability table (first variable most significant). The
 * pointer stays valid until `dist` is freed.
 *
 * # Safety
 * `dist` must be a live handle; `data` and `len` must be writable.
 */
enum QcmStatus qcm_distribution_probabilities(const struct QcmDistribution *dist,
                                              const double **data,
                                              size_t *len);

/**
 * # Safety
 * `dist` must be NULL or a live handle from this library.
 */
void qcm_distribution_free(struct QcmDistribution *dist);

/**
 * Total-variation distance; `b` is aligned to `a`'s variable order first.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum QcmStatus qcm_tv_distance(const struct QcmDistribution *a,
                               const struct QcmDistribution *b,
                               double *out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QcmStatus qcm_graph_from_json(const char *json, struct QcmGraph **out);

/**
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_graph_to_json(const struct QcmGraph *graph, char **out);

/**
 * # Safety
 * `graph` must be NULL or a live handle from this library.
 */
void qcm_graph_free(struct QcmGraph *graph);

/**
 * Same graph with every edge reversed.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_graph_invert(const struct QcmGraph *graph, struct QcmGraph **out);

/**
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum QcmStatus qcm_graph_is_qdag(const struct QcmGraph *graph, bool *out);

/**
 * Quantum Markov condition check. `report_json` may be NULL; otherwise it
 * receives the full report (caller frees).
 *
 * # Safety
 * `dist` and `graph` must be live handles; `pass` and `worst_residual` must be writable.
 */
enum QcmStatus qcm_markov_check(const struct QcmDistribution *dist,
                                const struct QcmGraph *graph,
                                double tol,
                                bool *pass,
                                double *worst_residual,
                                char **report_json);

/**
 * Statistics with `node` un-measured, from the table and graph alone.
 *
 * # Safety
 * `dist` and `graph` must be live handles, `node` a NUL-terminated string, `out` writable.
 */
enum QcmStatus qcm_unmeasure_formula(const struct QcmDistribution *dist,
                                     const struct QcmGraph *graph,
                                     const char *node,
                                     struct QcmDistribution **out);

/**
 * Statistics after intervening on `node` with outcome `value` (0-based), from the table and graph alone.
 * `variant` is a `QcmVariant` value.
 *
 * # Safety
 * `dist` and `graph` must be live handles, `node` a NUL-terminated string, `out` writable.
 */
enum QcmStatus qcm_intervene_formula(const struct QcmDistribution *dist,
                                     const struct QcmGraph *graph,
                                     const char *node,
                                     size_t value,
                                     uint32_t variant,
                                     struct QcmDistribution **out);

/**
 * Validates the built-in SIC of dimension `dim` (2 or 3) at `tol`.
 *
 * # Safety
 * `pass` and `max_error` must be writable.
 */
enum QcmStatus qcm_sic_validate(size_t dim, double tol, bool *pass, double *max_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCM_H */
