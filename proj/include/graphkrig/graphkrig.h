/* C interface to graphkrig. All functions are thread-compatible: distinct
 * handles may be used from different threads; a handle must not be mutated
 * concurrently. Error details are kept per thread. */
#ifndef GRAPHKRIG_H
#define GRAPHKRIG_H

#include <stddef.h>
#include <stdint.h>

#if defined(GRAPHKRIG_BUILDING)
#define GK_API __attribute__((visibility("default")))
#else
#define GK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gk_status {
  GK_OK = 0,
  GK_INVALID_ARGUMENT = 1,
  GK_PARSE_ERROR = 2,
  GK_NOT_FOUND = 3,
  GK_NUMERIC_ERROR = 4,
  GK_REDUCIBLE_WALK = 5,
  GK_IO_ERROR = 6,
  GK_INTERNAL_ERROR = 99
} gk_status;

typedef struct gk_dataset gk_dataset;
typedef struct gk_method gk_method;
typedef struct gk_prediction gk_prediction;
typedef struct gk_experiment gk_experiment;

GK_API const char* gk_version(void);
/* "ok", "invalid_argument", "parse_error", ... */
GK_API const char* gk_status_name(gk_status status);
/* Message of the last failed call on this thread; "" if none. */
GK_API const char* gk_last_error_message(void);

/* ---- datasets ---- */

/* Edge list TSV `src<TAB>dst[<TAB>weight]` and labels CSV `node,label`.
 * labels_path may be NULL. binary != 0 requires labels in {-1, 1}. */
GK_API gk_status gk_dataset_load(const char* edges_path, const char* labels_path, int binary,
                                 gk_dataset** out);
/* Nodes are named "0" .. "n-1". weights may be NULL (all 1). */
GK_API gk_status gk_dataset_from_edges(size_t n, const size_t* src, const size_t* dst,
                                       const double* weights, size_t edge_count,
                                       gk_dataset** out);
/* Replaces all labels. */
GK_API gk_status gk_dataset_set_labels(gk_dataset* ds, const size_t* nodes, const double* values,
                                       size_t count, int binary);
GK_API void gk_dataset_free(gk_dataset* ds);
GK_API size_t gk_dataset_node_count(const gk_dataset* ds);
GK_API size_t gk_dataset_label_count(const gk_dataset* ds);
/* NULL when i is out of range. Valid until the dataset is freed. */
GK_API const char* gk_dataset_node_name(const gk_dataset* ds, size_t i);

typedef struct gk_summary {
  size_t nodes;
  size_t edges;
  size_t labeled;
  double volume;
  double zero_percent;
  int symmetric;
  int strongly_connected;
  double out_degree[5]; /* min, q25, median, q75, max */
  double in_degree[5];
} gk_summary;

GK_API gk_status gk_dataset_describe(const gk_dataset* ds, gk_summary* out);
/* `key,value` CSV; path "-" writes to stdout. */
GK_API gk_status gk_dataset_write_summary(const gk_dataset* ds, const char* path);

/* ---- methods ---- */

/* Names: random-walk, tikhonov, tikhonov-interpolated, zhou2004, hub-authority,
 * manifold-linear, spectral-transform, empirical-rw, empirical-tikhonov,
 * baseline-rw, baseline-tikhonov, random-guess. */
GK_API gk_status gk_method_create(const char* name, gk_method** out);
GK_API gk_status gk_method_set(gk_method* m, const char* key, const char* value);
GK_API const char* gk_method_name(const gk_method* m);
GK_API void gk_method_free(gk_method* m);

/* ---- single runs ---- */

typedef struct gk_predict_options {
  uint64_t seed;
  unsigned threads;
  /* In (0, 1): hold out this share of the labels, score on it and let
   * smoothers pick their tuning value by that score. 0: use every label. */
  double holdout_fraction;
} gk_predict_options;

GK_API gk_status gk_predict(const gk_dataset* ds, const gk_method* m,
                            const gk_predict_options* opts, gk_prediction** out);
GK_API size_t gk_prediction_size(const gk_prediction* p);
GK_API const double* gk_prediction_values(const gk_prediction* p);
/* 1 if node i was held out. */
GK_API int gk_prediction_is_held_out(const gk_prediction* p, size_t i);
/* Holdout metric (MSE, or 1 - AUC for binary data). Returns 0 and leaves
 * *value untouched when there was no holdout or the metric is undefined. */
GK_API int gk_prediction_metric(const gk_prediction* p, double* value);
/* e.g. "lambda=1"; "" when nothing was chosen. */
GK_API const char* gk_prediction_choice(const gk_prediction* p);
/* CSV `node,prediction,label,role` with role in {train, test, unlabeled}. */
GK_API gk_status gk_prediction_write_csv(const gk_prediction* p, const gk_dataset* ds,
                                         const char* path);
GK_API void gk_prediction_free(gk_prediction* p);

/* Cross-validates (sigma2, lambda_inv) of an empirical method over the
 * default grid on all labels. CSV `sigma2,lambda_inv,score,best`. */
GK_API gk_status gk_cross_validate(const gk_dataset* ds, const gk_method* m, uint64_t seed,
                                   unsigned threads, const char* path);

/* Fits the correlation curve of an empirical method on all labels and
 * writes CSV `s,log1p_s,rho` over the distinct off-diagonal similarities.
 * Uses the method's sigma2/lambda_inv when both are set, else cross-validates. */
GK_API gk_status gk_export_rho(const gk_dataset* ds, const gk_method* m, uint64_t seed,
                               unsigned threads, const char* path);

/* ---- experiments ---- */

GK_API gk_status gk_experiment_create(gk_experiment** out);
/* Keys: fractions (comma list), trials, seed, metric (mse | auc),
 * baseline (regress | random), threads. */
GK_API gk_status gk_experiment_set(gk_experiment* e, const char* key, const char* value);
/* Copies the method. */
GK_API gk_status gk_experiment_add_method(gk_experiment* e, const gk_method* m);
/* Writes the per-trial and aggregate CSVs. */
GK_API gk_status gk_experiment_run(const gk_experiment* e, const gk_dataset* ds,
                                   const char* results_path, const char* aggregate_path);
GK_API void gk_experiment_free(gk_experiment* e);

#ifdef __cplusplus
}
#endif

#endif
