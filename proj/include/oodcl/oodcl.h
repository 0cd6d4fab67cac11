/* oodcl — OOD-aware prototypical supervised contrastive learning.
 *
 * C interface to the shared library: opaque handles, status codes, and
 * thread-local error messages. Status values double as the CLI exit codes.
 */
#ifndef OODCL_H
#define OODCL_H

#include <stddef.h>

#if defined(_WIN32)
#  define OODCL_API __declspec(dllexport)
#else
#  define OODCL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oodcl_status {
  OODCL_OK = 0,
  OODCL_ERR_CONFIG = 2,  /* usage, config, or missing-input errors */
  OODCL_ERR_RUNTIME = 3  /* runtime or numeric errors */
} oodcl_status;

/* Message for the most recent failure on the calling thread. Never NULL. */
OODCL_API const char* oodcl_last_error(void);

OODCL_API const char* oodcl_version(void);

typedef struct oodcl_config oodcl_config;
typedef struct oodcl_model oodcl_model;

/* Parses a key=value config file, applying `overrides` (further key=value
 * strings) on top. Unknown keys fail. The OODCL_SEED environment variable
 * fills data.seed/train.seed when nothing else sets them. */
OODCL_API oodcl_status oodcl_config_load(const char* path,
                                         const char* const* overrides,
                                         size_t n_overrides,
                                         oodcl_config** out_config);
OODCL_API void oodcl_config_free(oodcl_config* config);

/* Command-level entry points. Returned strings are heap-allocated; release
 * them with oodcl_string_free. */
OODCL_API oodcl_status oodcl_gen_data(const oodcl_config* config,
                                      char** out_summary);

/* variant: psupcon | opsupcon-r | opsupcon-p | opsupcon-m | ce | energy */
OODCL_API oodcl_status oodcl_train(const oodcl_config* config,
                                   const char* variant, char** out_summary);

/* score: maxlogit | msp | energy, or NULL for the configured default. Writes
 * the report under out.dir and returns the JSON text plus the file path. */
OODCL_API oodcl_status oodcl_eval(const oodcl_config* config,
                                  const char* checkpoint_path,
                                  const char* score, char** out_report_json,
                                  char** out_report_path);

/* variants may be NULL/0 to use the config's compare.variants list. */
OODCL_API oodcl_status oodcl_compare(const oodcl_config* config,
                                     const char* const* variants,
                                     size_t n_variants, char** out_table,
                                     char** out_json);

OODCL_API void oodcl_string_free(char* s);

/* Model-level access for embedding the detector. */
OODCL_API oodcl_status oodcl_model_load(const char* checkpoint_path,
                                        oodcl_model** out_model);
OODCL_API void oodcl_model_free(oodcl_model* model);
OODCL_API oodcl_status oodcl_model_input_dim(const oodcl_model* model,
                                             size_t* out_dim);
OODCL_API oodcl_status oodcl_model_classify(const oodcl_model* model,
                                            const double* x, size_t dim,
                                            int* out_class);
/* Higher score = more in-distribution, for every scoring function. */
OODCL_API oodcl_status oodcl_model_score(const oodcl_model* model,
                                         const double* x, size_t dim,
                                         const char* score, double temperature,
                                         double* out_score);

#ifdef __cplusplus
}
#endif

#endif /* OODCL_H */
