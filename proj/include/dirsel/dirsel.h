#ifndef DIRSEL_DIRSEL_H
#define DIRSEL_DIRSEL_H

#include <stddef.h>

#if defined(_WIN32)
#  ifdef DIRSEL_BUILDING
#    define DIRSEL_API __declspec(dllexport)
#  else
#    define DIRSEL_API __declspec(dllimport)
#  endif
#else
#  define DIRSEL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dirsel_status {
  DIRSEL_OK = 0,
  DIRSEL_E_CONFIG = 1,      /* malformed config, unknown key, bad value */
  DIRSEL_E_VALIDATION = 2,  /* model assumptions fail (incl. non-extinction) */
  DIRSEL_E_NUMERICAL = 3,   /* run aborted: NaN, lost concavity, breakdown */
  DIRSEL_E_IO = 4,
  DIRSEL_E_ARG = 5,         /* null handle, eps <= 0, threads < 1 */
  DIRSEL_E_INTERNAL = 6
} dirsel_status;

typedef struct dirsel_scenario dirsel_scenario;

typedef struct dirsel_bounds {
  double rho_m;
  double rho_M;
  double c_m;
  double c_B;
} dirsel_bounds;

/* Scenario handles. The load functions parse but do not validate. */
DIRSEL_API int dirsel_scenario_load(const char* path, dirsel_scenario** out);
DIRSEL_API int dirsel_scenario_from_json(const char* text, dirsel_scenario** out);
DIRSEL_API int dirsel_scenario_default(dirsel_scenario** out);
DIRSEL_API void dirsel_scenario_free(dirsel_scenario* scenario);

/* Strings returned through char** are owned by the caller. */
DIRSEL_API int dirsel_scenario_echo(const dirsel_scenario* scenario, char** out);
DIRSEL_API int dirsel_scenario_symbol_table(const dirsel_scenario* scenario, char** out);
DIRSEL_API void dirsel_string_free(char* s);

DIRSEL_API int dirsel_scenario_set_output_dir(dirsel_scenario* scenario, const char* dir);

/* Runs every assumption check. report (optional) receives the text report;
 * it is filled even when the status is DIRSEL_E_VALIDATION. */
DIRSEL_API int dirsel_validate(const dirsel_scenario* scenario, char** report);
DIRSEL_API int dirsel_bounds_of(const dirsel_scenario* scenario, dirsel_bounds* out);

/* Runs write into outdir; NULL means the scenario's outputs.dir. */
DIRSEL_API int dirsel_simulate(const dirsel_scenario* scenario, double eps, const char* outdir,
                               int dump_fields);
DIRSEL_API int dirsel_limit(const dirsel_scenario* scenario, const char* outdir);
DIRSEL_API int dirsel_sweep(const dirsel_scenario* scenario, const char* outdir, int threads);
DIRSEL_API int dirsel_plot(const char* reportdir);

/* Notes from the last call on this thread (warnings, written files), one per
 * line. Valid until the next call. */
DIRSEL_API const char* dirsel_last_message(void);
/* Error text of the last failed call on this thread; "" after success. */
DIRSEL_API const char* dirsel_last_error(void);
DIRSEL_API const char* dirsel_status_string(int status);

#ifdef __cplusplus
}
#endif

#endif
