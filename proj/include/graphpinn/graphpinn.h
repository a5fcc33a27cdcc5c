/* C interface to the graphpinn solver. All functions return a gp_status;
 * on failure gp_last_error() describes the problem (per thread). */
#ifndef GRAPHPINN_H
#define GRAPHPINN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define GP_API __attribute__((visibility("default")))
#else
#define GP_API
#endif

typedef enum gp_status {
  GP_OK = 0,
  GP_ERR_CONFIG = 1,     /* invalid configuration; gp_last_error_key() names the key */
  GP_ERR_PARSE = 2,      /* malformed graph or checkpoint text */
  GP_ERR_VALIDATION = 3, /* parsed input violates an invariant */
  GP_ERR_IO = 4,
  GP_ERR_DIVERGENCE = 5, /* training produced a non-finite or runaway loss */
  GP_ERR_ARGUMENT = 6,   /* bad argument to this API (null handle, index out of range) */
  GP_ERR_INTERNAL = 7
} gp_status;

typedef struct gp_config gp_config;
typedef struct gp_graph gp_graph;
typedef struct gp_checkpoint gp_checkpoint;

typedef void (*gp_log_fn)(const char* line, void* user);

GP_API const char* gp_version(void);
GP_API const char* gp_status_name(gp_status s);
GP_API const char* gp_last_error(void);
GP_API const char* gp_last_error_key(void); /* "" unless the last error was GP_ERR_CONFIG */

/* Log lines from long operations; pass NULL to silence. Process-wide. */
GP_API void gp_set_log(gp_log_fn fn, void* user);

/* ---- configuration ---- */
GP_API gp_status gp_config_preset(const char* kind, gp_config** out);
/* preset may be NULL or "" to use the file's own `preset` key. */
GP_API gp_status gp_config_load(const char* path, const char* preset, gp_config** out);
GP_API gp_status gp_config_parse(const char* json_text, const char* preset, gp_config** out);
GP_API void gp_config_free(gp_config* c);
GP_API gp_status gp_config_set_seed(gp_config* c, uint64_t seed);
GP_API gp_status gp_config_set_iterations(gp_config* c, int iterations);
GP_API gp_status gp_config_set_output(gp_config* c, const char* dir);
GP_API const char* gp_config_output(const gp_config* c);
/* Full config as JSON; valid until the next call on this handle. */
GP_API const char* gp_config_json(gp_config* c);

/* ---- commands ---- */
typedef struct gp_run_summary {
  double validation_error;
  double final_lambda;
  double wall_seconds;
  int num_edges;
} gp_run_summary;

GP_API gp_status gp_run(const gp_config* c, const char* out_dir, gp_run_summary* summary);
/* table[row * 4 + col]: rows are lengths 1, 5, 10; columns relu, sigmoid, sin2, sin2_plus_x.
 * Failed cells are NaN; the call itself fails only on setup errors. */
GP_API gp_status gp_sweep_activations(const gp_config* c, const char* out_dir, int jobs, double table[12]);
GP_API gp_status gp_dump_dataset(const gp_config* c, const char* out_dir);

/* ---- checkpoints ---- */
GP_API gp_status gp_checkpoint_load(const char* path, gp_checkpoint** out);
GP_API void gp_checkpoint_free(gp_checkpoint* c);
GP_API gp_status gp_checkpoint_validation_error(const gp_checkpoint* c, double* err);
GP_API gp_status gp_checkpoint_lambda(const gp_checkpoint* c, double* lambda);
GP_API gp_status gp_checkpoint_num_edges(const gp_checkpoint* c, int* n);

/* ---- graphs ---- */
GP_API gp_status gp_graph_parse(const char* text, gp_graph** out);
GP_API gp_status gp_graph_load(const char* path, gp_graph** out);
GP_API void gp_graph_free(gp_graph* g);
GP_API int gp_graph_num_nodes(const gp_graph* g);
GP_API int gp_graph_num_edges(const gp_graph* g);
/* Writes up to cap boundary node ids; returns the total count, or -1 on a NULL handle. */
GP_API int gp_graph_boundary(const gp_graph* g, int* nodes, int cap);
GP_API gp_status gp_graph_degree(const gp_graph* g, int node, int* degree);

#ifdef __cplusplus
}
#endif

#endif
