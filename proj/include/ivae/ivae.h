/* C interface to the ivae library.
 *
 * Objects are opaque handles created and destroyed by the library. Every
 * fallible call returns an ivae_status; on failure ivae_last_error() holds a
 * message for the calling thread. Strings are copied into caller buffers:
 * `needed` receives the length including the terminating NUL, and the call
 * fails with IVAE_INVALID_ARGUMENT if `cap` is too small (the buffer is then
 * left untouched). */
#ifndef IVAE_IVAE_H_
#define IVAE_IVAE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IVAE_API __declspec(dllexport)
#else
#define IVAE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ivae_status {
  IVAE_OK = 0,
  IVAE_INVALID_ARGUMENT = 1,
  IVAE_IO = 2,
  IVAE_PARSE = 3,
  IVAE_NUMERIC = 4,
  IVAE_NOT_FOUND = 5,
  IVAE_INTERNAL = 6
} ivae_status;

typedef struct ivae_config ivae_config;
typedef struct ivae_dataset ivae_dataset;
typedef struct ivae_model ivae_model;
typedef struct ivae_report ivae_report;

IVAE_API const char* ivae_version(void);
IVAE_API const char* ivae_status_name(ivae_status status);
/* Message of the last failed call on this thread; "" if none. */
IVAE_API const char* ivae_last_error(void);

/* Configuration: sections synth, model, train, eval, sweep, ihdp; keys are
 * "section.key". */
IVAE_API ivae_status ivae_config_create(ivae_config** out);
/* Defaults overlaid with an INI file. */
IVAE_API ivae_status ivae_config_load(const char* path, ivae_config** out);
IVAE_API ivae_status ivae_config_set(ivae_config* config, const char* key,
                                     const char* value);
IVAE_API ivae_status ivae_config_get(const ivae_config* config,
                                     const char* key, char* buf, size_t cap,
                                     size_t* needed);
/* Resolved configuration as INI text. */
IVAE_API ivae_status ivae_config_dump(const ivae_config* config, char* buf,
                                      size_t cap, size_t* needed);
IVAE_API void ivae_config_destroy(ivae_config* config);

/* Synthetic dataset from the config's synth section. */
IVAE_API ivae_status ivae_dataset_generate(const ivae_config* config,
                                           ivae_dataset** out);
/* One IHDP replication from the config's ihdp section. */
IVAE_API ivae_status ivae_dataset_ihdp(const ivae_config* config,
                                       int replication, ivae_dataset** out);
IVAE_API ivae_status ivae_dataset_load(const char* path, ivae_dataset** out);
IVAE_API ivae_status ivae_dataset_save(const ivae_dataset* data,
                                       const char* path);
IVAE_API ivae_status ivae_dataset_info(const ivae_dataset* data,
                                       int* n_units, int* covariate_dim,
                                       int* n_treated);
IVAE_API void ivae_dataset_destroy(ivae_dataset* data);

/* Untrained model for `data` (covariate count taken from the data). */
IVAE_API ivae_status ivae_model_create(const ivae_config* config,
                                       const ivae_dataset* data,
                                       ivae_model** out);
/* Trains with the config's train section. `trace_path` may be NULL;
 * otherwise the per-epoch trace is written there as CSV. */
IVAE_API ivae_status ivae_model_train(ivae_model* model,
                                      const ivae_config* config,
                                      const ivae_dataset* data,
                                      const char* trace_path);
IVAE_API ivae_status ivae_model_load(const char* path, ivae_model** out);
IVAE_API ivae_status ivae_model_save(const ivae_model* model,
                                     const char* path);
IVAE_API void ivae_model_destroy(ivae_model* model);

/* Metrics of `model` on `data` with the config's eval section; fits the
 * naive baseline when eval.baseline is true. */
IVAE_API ivae_status ivae_evaluate(const ivae_model* model,
                                   const ivae_config* config,
                                   const ivae_dataset* data,
                                   ivae_report** out);
/* Metric by CSV column name, e.g. "pehe_pre", "fit0_r2". */
IVAE_API ivae_status ivae_report_get(const ivae_report* report,
                                     const char* name, double* value);
/* CSV header and row, without trailing newline. */
IVAE_API ivae_status ivae_report_csv(const ivae_report* report,
                                     int with_header, char* buf, size_t cap,
                                     size_t* needed);
IVAE_API void ivae_report_destroy(ivae_report* report);

/* Called after each finished run: index (1-based), total, the report's CSV
 * row, seconds taken. */
typedef void (*ivae_progress_fn)(int done, int total, const char* csv_row,
                                 double seconds, void* user);

/* Runs the sweep of the config's sweep section and writes the per-model
 * rows to `rows_path` and the per-cell summary to `summary_path` (either
 * may be NULL). */
IVAE_API ivae_status ivae_sweep_run(const ivae_config* config,
                                    const char* rows_path,
                                    const char* summary_path,
                                    ivae_progress_fn progress, void* user);
/* IHDP replications; returns IVAE_NOT_FOUND when the covariate file is not
 * installed. */
IVAE_API ivae_status ivae_ihdp_run(const ivae_config* config,
                                   const char* rows_path,
                                   ivae_progress_fn progress, void* user);

typedef void (*ivae_check_fn)(const char* name, int passed,
                              const char* detail, void* user);
/* Numerical self-test; `failures` receives the number of failed checks. */
IVAE_API ivae_status ivae_selftest(uint64_t seed, ivae_check_fn on_check,
                                   void* user, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* IVAE_IVAE_H_ */
