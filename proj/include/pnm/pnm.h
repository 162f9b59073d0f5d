#ifndef PNM_PNM_H
#define PNM_PNM_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(PNM_BUILDING_LIBRARY)
#    define PNM_API __declspec(dllexport)
#  else
#    define PNM_API __declspec(dllimport)
#  endif
#else
#  define PNM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pnm_status {
  PNM_OK = 0,
  PNM_ERR_ARGUMENT = 1,  /* null handle, bad index, buffer too small */
  PNM_ERR_CONFIG = 2,    /* parse or validation failure */
  PNM_ERR_SOLVER = 3,    /* a run aborted; results hold the partial run */
  PNM_ERR_IO = 4,
  PNM_ERR_TOPOLOGY = 5,
  PNM_ERR_INTERNAL = 6
} pnm_status;

typedef struct pnm_config pnm_config;
typedef struct pnm_network pnm_network;
typedef struct pnm_run pnm_run;

typedef struct pnm_run_summary {
  double t_final;
  size_t steps;
  long newton_total;
  int failed_attempts;
  size_t events;
  size_t invaded_count;
  double e_pce;
  double e_max;
  double max_imbalance;
  int completed;
} pnm_run_summary;

PNM_API const char* pnm_version(void);

/* Message of the last failed call on this thread; empty after success. */
PNM_API const char* pnm_last_error(void);

/* Human-readable report of the last successful pnm_cmd_* call on this thread. */
PNM_API const char* pnm_last_report(void);

PNM_API pnm_status pnm_config_load(const char* path, pnm_config** out);
PNM_API pnm_status pnm_config_parse(const char* text, pnm_config** out);
PNM_API void pnm_config_free(pnm_config* cfg);

/* Overrides. The seed also sets the first seed of a study. */
PNM_API pnm_status pnm_config_set_seed(pnm_config* cfg, unsigned long long seed);
/* name: fi-n | fi-r | fi-theta. Replaces the study scheme list too. */
PNM_API pnm_status pnm_config_set_scheme(pnm_config* cfg, const char* name);
/* Only valid when the scheme (and every study scheme) is fi-r. */
PNM_API pnm_status pnm_config_set_delta(pnm_config* cfg, double delta);
PNM_API pnm_status pnm_config_set_output(pnm_config* cfg, const char* dir);
PNM_API const char* pnm_config_output(const pnm_config* cfg);

/* Writes the full echoed config. *needed receives the size including the terminator. */
PNM_API pnm_status pnm_config_echo(const pnm_config* cfg, char* buf, size_t cap, size_t* needed);

PNM_API pnm_status pnm_network_build(const pnm_config* cfg, pnm_network** out);
PNM_API void pnm_network_free(pnm_network* net);
PNM_API size_t pnm_network_pore_count(const pnm_network* net);
PNM_API size_t pnm_network_throat_count(const pnm_network* net);
PNM_API pnm_status pnm_network_write(const pnm_network* net, const char* path);

/* In-memory run. On PNM_ERR_SOLVER *out still holds the partial run. */
PNM_API pnm_status pnm_run_execute(const pnm_config* cfg, pnm_run** out);
PNM_API void pnm_run_free(pnm_run* run);
PNM_API pnm_status pnm_run_get_summary(const pnm_run* run, pnm_run_summary* out);
/* State index 0 is the initial state; n must equal the pore count. */
PNM_API pnm_status pnm_run_saturation(const pnm_run* run, size_t state, double* sn, size_t n);
PNM_API pnm_status pnm_run_time(const pnm_run* run, size_t state, double* t);

/* The CLI subcommands. Files go to out_dir, or to the configured output directory when
   out_dir is NULL. */
PNM_API pnm_status pnm_cmd_run(const pnm_config* cfg, const char* out_dir);
PNM_API pnm_status pnm_cmd_ensemble(const pnm_config* cfg, const char* out_dir);
PNM_API pnm_status pnm_cmd_converge(const pnm_config* cfg, const char* out_dir);
PNM_API pnm_status pnm_cmd_network(const pnm_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
