/* Public C interface of the edgeserve simulator.
 *
 * Every function returns an es_status. On failure es_last_error() describes
 * the problem; the message is thread-local and valid until the next call on
 * the same thread. Handles are opaque and owned by the caller, who releases
 * them with the matching *_free function (NULL is accepted).
 */
#ifndef EDGESERVE_H
#define EDGESERVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(EDGESERVE_BUILDING)
#define ES_API __attribute__((visibility("default")))
#else
#define ES_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum es_status {
    ES_OK = 0,
    ES_ERR_INVALID_SPEC = 1,
    ES_ERR_MISSING_CALIBRATION = 2,
    ES_ERR_PARSE = 3,
    ES_ERR_CONFIG = 4,
    ES_ERR_NUMERIC = 5,
    ES_ERR_IO = 6,
    ES_ERR_ARGUMENT = 7,
    ES_ERR_DOMAIN = 8,
    ES_ERR_INTERNAL = 9
} es_status;

ES_API const char* es_version(void);
ES_API const char* es_last_error(void);
ES_API const char* es_status_name(es_status s);

/* Process exit code for a status: 0 ok, 2 validation, 3 numeric, 1 other. */
ES_API int es_exit_code(es_status s);

/* ---- configuration ---------------------------------------------------- */

typedef struct es_config es_config;

/* path == NULL yields the built-in defaults. */
ES_API es_status es_config_load(const char* path, es_config** out);
ES_API es_status es_config_parse(const char* toml_text, es_config** out);
ES_API void es_config_free(es_config* cfg);
ES_API es_status es_config_set_seed(es_config* cfg, uint64_t seed);
ES_API es_status es_config_seed(const es_config* cfg, uint64_t* out);
ES_API es_status es_config_hash(const es_config* cfg, uint64_t* out);

/* ---- commands ---------------------------------------------------------- */

/* Optional overrides; zero-initialise and set what is needed. */
typedef struct es_run_options {
    const char* out_dir;     /* default "out" */
    const char* policy;      /* NULL: from config */
    int adapt;               /* -1: from config, 0 off, 1 on */
    const char* checkpoint;  /* evaluate only */
    const char* mechanism;   /* auction: "dda" or "ida"; NULL: both */
    uint64_t market_size;    /* auction: 0 = config sizes */
    uint64_t seeds;          /* auction: 0 = config value */
    int quiet;               /* non-zero: no progress lines on stderr */
} es_run_options;

ES_API void es_run_options_init(es_run_options* opts);

/* command: train, evaluate, baselines, sweep, auction, bounds, gradcheck */
ES_API es_status es_run(const es_config* cfg, const char* command, const es_run_options* opts);

/* ---- simulator --------------------------------------------------------- */

typedef struct es_env es_env;

typedef struct es_cost {
    double switching;
    double transmission;
    double computation;
    double accuracy;
    double cloud;
    double total;
} es_cost;

/* shifted != 0 selects the demand-shifted test environment. */
ES_API es_status es_env_create(const es_config* cfg, int shifted, es_env** out);
ES_API void es_env_free(es_env* env);
/* Number of (server, agent, model) cells, and the horizon. */
ES_API es_status es_env_dims(const es_env* env, size_t* cells, size_t* horizon);
ES_API es_status es_env_reset(es_env* env, uint64_t episode_seed);
/* Current requests, one int per cell (server-major, then agent, then model). */
ES_API es_status es_env_requests(const es_env* env, int* out, size_t cells);
/* Applies a raw action (repaired when infeasible) and reports the slot cost.
 * done is set to 1 at the end of the horizon. */
ES_API es_status es_env_step(es_env* env, const int* cache, const double* offload, size_t cells, es_cost* cost,
                             int* done);
/* Effective cache bits and offload fractions of the last step. */
ES_API es_status es_env_last_action(const es_env* env, int* cache, double* offload, size_t cells);

/* ---- auction ----------------------------------------------------------- */

typedef struct es_auction_result {
    double price;
    double social_welfare;
    size_t trades;
    size_t rounds;
} es_auction_result;

/* Runs one market. winners_buy / winners_sell receive up to `cap` ids each
 * (may be NULL). Clock settings come from the config. */
ES_API es_status es_auction_run(const es_config* cfg, const char* mechanism, const double* bids, size_t n_bids,
                                const double* asks, size_t n_asks, es_auction_result* out, size_t* winners_buy,
                                size_t* winners_sell, size_t cap);

/* ---- reasoning bounds and tables -------------------------------------- */

/* mode: 0 = CoT, 1 = SC-CoT. Result in percent. */
ES_API es_status es_accuracy_lookup(const char* model, const char* dataset, double paths, int mode, double* out);
/* 2 * eta / (1 - eta) * prod_y eps_y / (1 - eps_y) over the given step ambiguities. */
ES_API es_status es_cot_bound(double input_ambiguity, const double* steps, size_t n_steps, double* out);

#ifdef __cplusplus
}
#endif

#endif
