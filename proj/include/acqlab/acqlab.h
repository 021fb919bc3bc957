#ifndef ACQLAB_ACQLAB_H
#define ACQLAB_ACQLAB_H

/* C interface to the acquisition workbench. Every call returns an acq_status;
   on failure acq_last_error() describes it (per thread, valid until the next
   call). Strings returned through char** are owned by the caller and must be
   released with acq_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ACQ_API __declspec(dllexport)
#else
#define ACQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum acq_status {
    ACQ_OK = 0,
    ACQ_ERR_INVALID_ARGUMENT = 1,
    ACQ_ERR_UNKNOWN_BENCHMARK = 2,
    ACQ_ERR_INVALID_PARAMS = 3,
    ACQ_ERR_INVALID_INSTANCE = 4,
    ACQ_ERR_IO = 5,
    ACQ_ERR_UNKNOWN_SESSION = 6,
    ACQ_ERR_WRONG_PHASE = 7,
    ACQ_ERR_INTERNAL = 8
} acq_status;

typedef struct acq_instance acq_instance;
typedef struct acq_config acq_config;
typedef struct acq_report acq_report;
typedef struct acq_sessions acq_sessions;
typedef struct acq_server acq_server;

ACQ_API const char* acq_version(void);
ACQ_API const char* acq_last_error(void);
ACQ_API const char* acq_status_name(acq_status s);
ACQ_API void acq_string_free(char* s);

/* Benchmarks and instances. size 0 means the family default, bias_level < 0 none. */
ACQ_API acq_status acq_benchmark_list(char** json_out);
ACQ_API acq_status acq_instance_from_benchmark(const char* name, size_t size, uint64_t seed, int bias_level,
                                               acq_instance** out);
ACQ_API acq_status acq_instance_load(const char* path, acq_instance** out);
ACQ_API acq_status acq_instance_parse(const char* json_text, acq_instance** out);
ACQ_API acq_status acq_instance_save(const acq_instance* inst, const char* path);
ACQ_API acq_status acq_instance_to_json(const acq_instance* inst, char** json_out);
ACQ_API acq_status acq_instance_info(const acq_instance* inst, size_t* vars, size_t* target, size_t* bias);
ACQ_API void acq_instance_free(acq_instance* inst);

/* Config keys: algo, findscope, qgen, var, val, cutmin, cutmax, seed, fas_cutoff. */
ACQ_API acq_status acq_config_new(acq_config** out);
ACQ_API acq_status acq_config_set(acq_config* cfg, const char* key, const char* value);
ACQ_API acq_status acq_config_to_json(const acq_config* cfg, char** json_out);
ACQ_API void acq_config_free(acq_config* cfg);

/* Experiments: `runs` simulated-oracle runs, per-run seeds derived from master_seed. */
enum { ACQ_RUN_CURVES = 1, ACQ_RUN_VERIFY = 2 };
typedef void (*acq_run_callback)(void* user, size_t index, const char* run_json);

ACQ_API acq_status acq_run(const acq_instance* inst, const acq_config* cfg, size_t runs, uint64_t master_seed,
                           unsigned flags, acq_run_callback cb, void* user, acq_report** out);
ACQ_API acq_status acq_report_csv(const acq_report* r, int include_timings, char** out);
ACQ_API acq_status acq_report_json(const acq_report* r, int include_timings, char** out);
ACQ_API acq_status acq_report_counts(const acq_report* r, size_t* runs, size_t* collapsed, size_t* premature,
                                     size_t* not_equivalent);
/* The run's instance document with its learned network under "learned". */
ACQ_API acq_status acq_report_learned(const acq_report* r, size_t index, char** json_out);
ACQ_API void acq_report_free(acq_report* r);

/* Mutual entailment of the instance's "learned" network and its target.
   *equivalent is 1/0, or -1 when a check ran out of budget. */
ACQ_API acq_status acq_verify(const acq_instance* inst, double budget_seconds, int* equivalent, char** json_out);

/* Sessions: request/response bodies are the protocol JSON. */
ACQ_API acq_status acq_sessions_new(double idle_timeout_seconds, acq_sessions** out);
ACQ_API acq_status acq_session_create(acq_sessions* m, const char* request_json, char** json_out);
ACQ_API acq_status acq_session_get(acq_sessions* m, const char* id, double wait_seconds, char** json_out);
ACQ_API acq_status acq_session_answer(acq_sessions* m, const char* id, const char* answer, char** json_out);
ACQ_API acq_status acq_session_transcript(acq_sessions* m, const char* id, char** json_out);
ACQ_API acq_status acq_session_delete(acq_sessions* m, const char* id);
ACQ_API void acq_sessions_free(acq_sessions* m);

/* HTTP service over a session manager. port 0 picks a free port. */
ACQ_API acq_status acq_server_new(acq_sessions* m, const char* host, int port, acq_server** out, int* bound_port);
ACQ_API acq_status acq_server_run(acq_server* s); /* blocks until acq_server_stop */
ACQ_API acq_status acq_server_start(acq_server* s);
ACQ_API acq_status acq_server_stop(acq_server* s);
ACQ_API void acq_server_free(acq_server* s);

#ifdef __cplusplus
}
#endif

#endif
