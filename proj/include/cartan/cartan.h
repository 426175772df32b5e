#ifndef CARTAN_H
#define CARTAN_H

/* Integral points on X_ns+(p): C interface. Every call returns a status;
   cartan_last_error() holds the message of the last failure on this thread. */

#include <stddef.h>

#if defined(_WIN32)
#define CARTAN_API __declspec(dllexport)
#else
#define CARTAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cartan_status {
  CARTAN_OK = 0,
  CARTAN_INVALID_ARGUMENT = 1,
  CARTAN_PRECISION = 2,
  CARTAN_VALIDATION = 3,
  CARTAN_CHECKPOINT = 4,
  CARTAN_IO = 5,
  CARTAN_INTERRUPTED = 6,
  CARTAN_INTERNAL = 7
} cartan_status;

typedef struct cartan_config cartan_config;
typedef struct cartan_report cartan_report;

/* return nonzero to stop the run between work units */
typedef int (*cartan_cancel_fn)(void* user);
typedef void (*cartan_log_fn)(const char* line, void* user);

CARTAN_API const char* cartan_version(void);
CARTAN_API const char* cartan_status_string(cartan_status s);
CARTAN_API const char* cartan_last_error(void);

CARTAN_API cartan_status cartan_config_create(cartan_config** out);
CARTAN_API void cartan_config_destroy(cartan_config* cfg);

CARTAN_API cartan_status cartan_config_set_prime(cartan_config* cfg, int p);
/* generator of H in F_p^x; 0 for H = {+-1} */
CARTAN_API cartan_status cartan_config_set_subgroup(cartan_config* cfg, int generator);
CARTAN_API cartan_status cartan_config_set_precision(cartan_config* cfg, long bits);
CARTAN_API cartan_status cartan_config_set_epsilon(cartan_config* cfg, double eps);
CARTAN_API cartan_status cartan_config_set_t0(cartan_config* cfg, double t0);
CARTAN_API cartan_status cartan_config_set_ell_budget(cartan_config* cfg, long ell);
CARTAN_API cartan_status cartan_config_set_denominator(cartan_config* cfg, long index);
CARTAN_API cartan_status cartan_config_set_workers(cartan_config* cfg, int workers);
/* NULL or "" clears */
CARTAN_API cartan_status cartan_config_set_checkpoint(cartan_config* cfg, const char* path);
CARTAN_API cartan_status cartan_config_set_report(cartan_config* cfg, const char* path);
CARTAN_API cartan_status cartan_config_set_unit_basis(cartan_config* cfg, const char* path);
CARTAN_API cartan_status cartan_config_set_validate_only(cartan_config* cfg, int on);
CARTAN_API cartan_status cartan_config_set_cancel(cartan_config* cfg, cartan_cancel_fn fn, void* user);
CARTAN_API cartan_status cartan_config_set_log(cartan_config* cfg, cartan_log_fn fn, void* user);

/* On failure *out is NULL. */
CARTAN_API cartan_status cartan_run(const cartan_config* cfg, cartan_report** out);
CARTAN_API void cartan_report_destroy(cartan_report* r);

CARTAN_API int cartan_report_validation_ok(const cartan_report* r);
CARTAN_API size_t cartan_report_point_count(const cartan_report* r);
/* strings stay valid until cartan_report_destroy */
CARTAN_API cartan_status cartan_report_point(const cartan_report* r, size_t i, const char** j,
                                             const char** classification, int* disc);
CARTAN_API size_t cartan_report_unresolved_count(const cartan_report* r);
CARTAN_API size_t cartan_report_small_j_undetermined_count(const cartan_report* r);
CARTAN_API cartan_status cartan_report_json(cartan_report* r, int include_timings, const char** json);

#ifdef __cplusplus
}
#endif

#endif
