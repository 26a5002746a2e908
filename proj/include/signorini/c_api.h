#ifndef SIGNORINI_C_API_H
#define SIGNORINI_C_API_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define SG_API __attribute__((visibility("default")))
#else
#define SG_API
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_INVALID_ARGUMENT = 1,
  SG_ERR_PRECONDITION = 2,
  SG_ERR_NUMERICAL = 3,
  SG_ERR_NOT_CONVERGED = 4,
  SG_ERR_IO = 5,
  SG_ERR_CONFIG = 6,
  SG_ERR_INTERNAL = 7
} sg_status;

typedef struct sg_run sg_run;

/* Message of the last failed call on this thread; "" when none. */
SG_API const char* sg_last_error(void);
SG_API const char* sg_version(void);
/* Strings returned through char** out-parameters are released with sg_free_string. */
SG_API void sg_free_string(char* s);

/* Worker threads for parallel loops (>= 1). */
SG_API sg_status sg_set_threads(int n);

/* Newline-separated preset names. */
SG_API sg_status sg_preset_names(char** out);
/* Normalized config JSON of a preset. */
SG_API sg_status sg_config_preset(const char* name, char** out_json);
/* Reads, validates and normalizes a config file. */
SG_API sg_status sg_load_config_file(const char* path, char** out_json);
/* Validates and normalizes config JSON text. */
SG_API sg_status sg_config_validate(const char* json, char** out_json);

SG_API sg_status sg_run_create(const char* config_json, const char* out_dir, const char* cache_dir, sg_run** out);
SG_API sg_status sg_run_execute(sg_run* run);
/* Summary JSON of an executed run. */
SG_API sg_status sg_run_summary(const sg_run* run, char** out_json);
SG_API void sg_run_destroy(sg_run* run);

/* Fieldwise comparison of two summary files; tolerances_json may be NULL.
   out_json receives the diff report, violations the number of violated fields. */
SG_API sg_status sg_compare(const char* summary_a_path, const char* summary_b_path, const char* tolerances_json,
                            char** out_json, int* violations);

#ifdef __cplusplus
}
#endif

#endif
