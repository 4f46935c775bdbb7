#ifndef COSMO_RUL_H
#define COSMO_RUL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CRUL_BUILDING_LIBRARY)
#    define CRUL_API __declspec(dllexport)
#  else
#    define CRUL_API __declspec(dllimport)
#  endif
#else
#  define CRUL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure crul_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum crul_status {
  CRUL_OK = 0,
  CRUL_INVALID_ARGUMENT = 1,
  CRUL_PARSE_ERROR = 2,
  CRUL_STRUCTURE_ERROR = 3,
  CRUL_IO_ERROR = 4,
  CRUL_NUMERIC_ERROR = 5,
  CRUL_INTERNAL_ERROR = 6
} crul_status;

#define CRUL_NUM_FEATURES 24

CRUL_API const char* crul_version(void);
CRUL_API const char* crul_last_error(void);
CRUL_API const char* crul_status_string(crul_status status);

/* ---- data ---------------------------------------------------------------- */

typedef struct crul_subset crul_subset;

/* subset: "FD001".."FD004"; split: "alpha" (train files) or "beta" (test
 * files plus RUL list). */
CRUL_API crul_status crul_subset_load(const char* data_root, const char* subset,
                                      const char* split, crul_subset** out);
CRUL_API crul_status crul_subset_read_cache(const char* path, crul_subset** out);
CRUL_API crul_status crul_subset_write_cache(const crul_subset* subset, const char* path);
CRUL_API crul_status crul_subset_counts(const crul_subset* subset, size_t* n_trajectories,
                                        size_t* n_samples);
CRUL_API void crul_subset_destroy(crul_subset* subset);

/* Writes train_FD00x.txt, test_FD00x.txt and RUL_FD00x.txt for a synthetic
 * four-subset fleet under root. */
CRUL_API crul_status crul_write_synthetic_data_root(const char* root, int units_per_subset,
                                                    uint64_t seed);

/* ---- COSMO features --------------------------------------------------------- */

typedef struct crul_feature_options {
  const char* distance; /* "knn", "mknn" or "mcp" */
  int k;
  size_t ref_size;
  int tau;
  uint64_t seed;
} crul_feature_options;

CRUL_API void crul_feature_options_init(crul_feature_options* options);

/* Draws a reference group from the first tau cycles of `reference` and writes
 * one CSV row per sample of `samples`: unit,cycle,theta_0..theta_23. */
CRUL_API crul_status crul_write_features(const crul_subset* samples,
                                         const crul_subset* reference,
                                         const crul_feature_options* options, const char* path);

/* x: 24 values; group: n_group rows of 24 (row-major); out: 24 values. */
CRUL_API crul_status crul_feature_vector(const double* x, const double* group, size_t n_group,
                                         const char* distance, int k, double* out);

/* samples: n rows of 24; only the three setting columns are used. */
CRUL_API crul_status crul_estimate_num_conditions(const double* samples, size_t n, int max_k,
                                                  uint64_t seed, int* out);

CRUL_API crul_status crul_check_k_condition(int k, size_t group_size, int n_conditions,
                                            int* out);

/* ---- regression ------------------------------------------------------------ */

typedef struct crul_forest crul_forest;

typedef struct crul_forest_config {
  int n_trees;
  int max_features; /* 0: ceil(d / 3) */
  int min_samples_leaf;
  int max_depth; /* 0: unlimited */
  int bootstrap;
  uint64_t seed;
  int n_threads;
} crul_forest_config;

CRUL_API void crul_forest_config_init(crul_forest_config* config);
/* features: n rows of d (row-major). */
CRUL_API crul_status crul_forest_fit(const double* features, size_t n, size_t d,
                                     const double* targets, const crul_forest_config* config,
                                     crul_forest** out);
CRUL_API crul_status crul_forest_predict(const crul_forest* forest, const double* features,
                                         size_t m, size_t d, double* out);
CRUL_API crul_status crul_forest_save(const crul_forest* forest, const char* path);
CRUL_API crul_status crul_forest_load(const char* path, crul_forest** out);
CRUL_API void crul_forest_destroy(crul_forest* forest);

/* ---- CORAL ----------------------------------------------------------------- */

/* Aligns the source rows to the target covariance; out has n_source rows of
 * d. n_warnings (may be NULL) receives the number of rank warnings. */
CRUL_API crul_status crul_coral_align(const double* source, size_t n_source, const double* target,
                                      size_t n_target, size_t d, double epsilon, double* out,
                                      int* n_warnings);

/* ---- experiments ------------------------------------------------------------ */

typedef struct crul_run_options {
  const char* scenario;  /* "A1".."H" */
  const char* method;    /* "raw", "coral" or "cosmo" */
  const char* distance;  /* cosmo: "knn", "mknn", "mcp" */
  const char* mode;      /* cosmo: "S,T", "S,ST", "ST,ST", "ST,T" */
  const char* eval_mode; /* "alpha" or "beta" */
  int k;
  size_t ref_size;
  int tau;
  int tau_max;
  int rul_limit;
  int folds;
  int repetitions;
  uint64_t seed;
  int n_trees;
  int min_samples_leaf;
  int max_features;
  int max_depth;
  int n_threads;
  int n_conditions;
  const int* curve_limits; /* NULL: 10, 20, ..., 130 */
  size_t n_curve_limits;
} crul_run_options;

typedef struct crul_result crul_result;

CRUL_API void crul_run_options_init(crul_run_options* options);
/* data_root may be NULL or empty to use COSMO_RUL_DATA_ROOT. */
CRUL_API crul_status crul_run_scenario(const crul_run_options* options, const char* data_root,
                                       crul_result** out);
/* Writes results/<scenario>_<tag>.csv, curves/<scenario>_<tag>.csv and
 * summary.json under out_dir. */
CRUL_API crul_status crul_result_write(const crul_result* result, const char* out_dir);
CRUL_API crul_status crul_result_method_tag(const crul_result* result, const char** out);
CRUL_API crul_status crul_result_mape(const crul_result* result, double* mean, double* std,
                                      size_t* n);
CRUL_API crul_status crul_result_rmse(const crul_result* result, double* mean, double* std,
                                      size_t* n);
CRUL_API crul_status crul_result_num_folds(const crul_result* result, size_t* out);
CRUL_API crul_status crul_result_fold(const crul_result* result, size_t index, int* repetition,
                                      int* fold, double* mape, double* rmse,
                                      size_t* n_included, size_t* n_excluded);
/* Fold-averaged curve. Writes up to capacity points; n receives the total.
 * Missing points are NaN. */
CRUL_API crul_status crul_result_curve(const crul_result* result, int* limits, double* mapes,
                                       size_t capacity, size_t* n);
CRUL_API crul_status crul_result_num_warnings(const crul_result* result, size_t* out);
CRUL_API crul_status crul_result_warning(const crul_result* result, size_t index,
                                         const char** out);
CRUL_API void crul_result_destroy(crul_result* result);

typedef void (*crul_progress_fn)(const char* scenario, const char* method_tag,
                                 const char* error, double mape_mean, size_t index,
                                 size_t total, void* user);

/* Runs every scenario of a config file, writing results incrementally to
 * out_dir. data_root (may be NULL) overrides the file's data_root. Scenario
 * failures are counted in n_failed, not returned as an error. */
CRUL_API crul_status crul_run_matrix(const char* config_path, const char* data_root,
                                     const char* out_dir, crul_progress_fn progress, void* user,
                                     size_t* n_ok, size_t* n_failed);

/* Summary tables from out_dir/results. Release with crul_free_string. */
CRUL_API crul_status crul_render_report(const char* out_dir, char** out);
CRUL_API void crul_free_string(char* s);

#ifdef __cplusplus
}
#endif

#endif
