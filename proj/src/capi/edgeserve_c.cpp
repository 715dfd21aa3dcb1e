#include "edgeserve.h"

#include <cstring>
#include <new>
#include <string>

#include "auction/auction.hpp"
#include "common/error.hpp"
#include "cot/bounds.hpp"
#include "cot/tables.hpp"
#include "harness/config.hpp"
#include "harness/experiments.hpp"
#include "learn/serving_env.hpp"

struct es_config {
    edgeserve::harness::ExperimentConfig cfg;
};

struct es_env {
    edgeserve::learn::ServingEnv env;
    std::size_t slot = 0;
};

namespace {

thread_local std::string g_last_error;

es_status status_of(edgeserve::ErrorKind k) {
    using edgeserve::ErrorKind;
    switch (k) {
        case ErrorKind::InvalidSpec: return ES_ERR_INVALID_SPEC;
        case ErrorKind::MissingCalibration: return ES_ERR_MISSING_CALIBRATION;
        case ErrorKind::Parse: return ES_ERR_PARSE;
        case ErrorKind::Config: return ES_ERR_CONFIG;
        case ErrorKind::Numeric: return ES_ERR_NUMERIC;
        case ErrorKind::Io: return ES_ERR_IO;
        case ErrorKind::Argument: return ES_ERR_ARGUMENT;
        case ErrorKind::Domain: return ES_ERR_DOMAIN;
    }
    return ES_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes.
template <class F>
es_status guard(F&& fn) {
    try {
        fn();
        g_last_error.clear();
        return ES_OK;
    } catch (const edgeserve::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return ES_ERR_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return ES_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ES_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw edgeserve::Error(edgeserve::ErrorKind::Argument, what);
}

}  // namespace

extern "C" {

const char* es_version(void) { return EDGESERVE_VERSION; }

const char* es_last_error(void) { return g_last_error.c_str(); }

const char* es_status_name(es_status s) {
    switch (s) {
        case ES_OK: return "ok";
        case ES_ERR_INVALID_SPEC: return "invalid spec";
        case ES_ERR_MISSING_CALIBRATION: return "missing calibration";
        case ES_ERR_PARSE: return "parse error";
        case ES_ERR_CONFIG: return "config error";
        case ES_ERR_NUMERIC: return "numeric error";
        case ES_ERR_IO: return "io error";
        case ES_ERR_ARGUMENT: return "argument error";
        case ES_ERR_DOMAIN: return "domain error";
        case ES_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

int es_exit_code(es_status s) {
    switch (s) {
        case ES_OK: return 0;
        case ES_ERR_INVALID_SPEC:
        case ES_ERR_MISSING_CALIBRATION:
        case ES_ERR_PARSE:
        case ES_ERR_CONFIG:
        case ES_ERR_ARGUMENT:
        case ES_ERR_DOMAIN: return 2;
        case ES_ERR_NUMERIC: return 3;
        default: return 1;
    }
}

es_status es_config_load(const char* path, es_config** out) {
    return guard([&] {
        require(out != nullptr, "es_config_load: out is NULL");
        *out = nullptr;
        auto c = new es_config{path ? edgeserve::harness::load_config(path) : edgeserve::harness::parse_config("")};
        *out = c;
    });
}

es_status es_config_parse(const char* toml_text, es_config** out) {
    return guard([&] {
        require(out != nullptr && toml_text != nullptr, "es_config_parse: NULL argument");
        *out = nullptr;
        *out = new es_config{edgeserve::harness::parse_config(toml_text)};
    });
}

void es_config_free(es_config* cfg) { delete cfg; }

es_status es_config_set_seed(es_config* cfg, uint64_t seed) {
    return guard([&] {
        require(cfg != nullptr, "es_config_set_seed: cfg is NULL");
        cfg->cfg.seed = seed;
        cfg->cfg.train.seed = seed;
    });
}

es_status es_config_seed(const es_config* cfg, uint64_t* out) {
    return guard([&] {
        require(cfg != nullptr && out != nullptr, "es_config_seed: NULL argument");
        *out = cfg->cfg.seed;
    });
}

es_status es_config_hash(const es_config* cfg, uint64_t* out) {
    return guard([&] {
        require(cfg != nullptr && out != nullptr, "es_config_hash: NULL argument");
        *out = edgeserve::harness::config_hash(cfg->cfg);
    });
}

void es_run_options_init(es_run_options* opts) {
    if (!opts) return;
    std::memset(opts, 0, sizeof *opts);
    opts->adapt = -1;
}

es_status es_run(const es_config* cfg, const char* command, const es_run_options* opts) {
    return guard([&] {
        require(cfg != nullptr && command != nullptr, "es_run: NULL argument");
        const auto cmd = edgeserve::harness::parse_command(command);
        if (!cmd) throw edgeserve::Error(edgeserve::ErrorKind::Argument, std::string("unknown command '") + command + "'");
        edgeserve::harness::RunOptions ro;
        if (opts) {
            if (opts->out_dir) ro.out_dir = opts->out_dir;
            if (opts->policy) ro.policy = opts->policy;
            if (opts->adapt >= 0) ro.adapt = opts->adapt != 0;
            if (opts->checkpoint) ro.checkpoint = opts->checkpoint;
            if (opts->mechanism) ro.mechanism = opts->mechanism;
            if (opts->market_size) ro.market_size = opts->market_size;
            if (opts->seeds) ro.seeds = opts->seeds;
            ro.quiet = opts->quiet != 0;
        }
        edgeserve::harness::run_command(*cmd, cfg->cfg, ro);
    });
}

es_status es_env_create(const es_config* cfg, int shifted, es_env** out) {
    return guard([&] {
        require(cfg != nullptr && out != nullptr, "es_env_create: NULL argument");
        *out = nullptr;
        *out = new es_env{edgeserve::harness::make_env(cfg->cfg, shifted != 0), 0};
    });
}

void es_env_free(es_env* env) { delete env; }

es_status es_env_dims(const es_env* env, size_t* cells, size_t* horizon) {
    return guard([&] {
        require(env != nullptr, "es_env_dims: env is NULL");
        if (cells) *cells = env->env.bits();
        if (horizon) *horizon = env->env.horizon();
    });
}

es_status es_env_reset(es_env* env, uint64_t episode_seed) {
    return guard([&] {
        require(env != nullptr, "es_env_reset: env is NULL");
        env->env.reset(episode_seed);
        env->slot = 0;
    });
}

es_status es_env_requests(const es_env* env, int* out, size_t cells) {
    return guard([&] {
        require(env != nullptr && out != nullptr, "es_env_requests: NULL argument");
        const auto& r = env->env.requests();
        require(cells == r.size(), "es_env_requests: wrong cell count");
        for (std::size_t k = 0; k < cells; ++k) out[k] = r[k];
    });
}

es_status es_env_step(es_env* env, const int* cache, const double* offload, size_t cells, es_cost* cost, int* done) {
    return guard([&] {
        require(env != nullptr && cache != nullptr && offload != nullptr, "es_env_step: NULL argument");
        require(cells == env->env.bits(), "es_env_step: wrong cell count");
        const auto shape = env->env.system().shape();
        edgeserve::env::Action a{edgeserve::Grid<int>(shape, 0), edgeserve::Grid<double>(shape, 0.0), false};
        for (std::size_t k = 0; k < cells; ++k) {
            a.cache[k] = cache[k] ? 1 : 0;
            a.offload[k] = offload[k];
        }
        const auto r = env->env.step_action(a);
        ++env->slot;
        if (cost) *cost = es_cost{r.cost.switching, r.cost.transmission, r.cost.computation, r.cost.accuracy,
                                  r.cost.cloud,     r.cost.total};
        if (done) *done = r.done ? 1 : 0;
    });
}

es_status es_env_last_action(const es_env* env, int* cache, double* offload, size_t cells) {
    return guard([&] {
        require(env != nullptr, "es_env_last_action: env is NULL");
        const auto& a = env->env.last_action();
        require(cells == a.cache.size(), "es_env_last_action: wrong cell count");
        for (std::size_t k = 0; k < cells; ++k) {
            if (cache) cache[k] = a.cache[k];
            if (offload) offload[k] = a.offload[k];
        }
    });
}

es_status es_auction_run(const es_config* cfg, const char* mechanism, const double* bids, size_t n_bids,
                         const double* asks, size_t n_asks, es_auction_result* out, size_t* winners_buy,
                         size_t* winners_sell, size_t cap) {
    return guard([&] {
        require(cfg != nullptr && mechanism != nullptr && out != nullptr, "es_auction_run: NULL argument");
        require((bids || n_bids == 0) && (asks || n_asks == 0), "es_auction_run: NULL price array");
        namespace au = edgeserve::auction;
        au::Market m;
        for (std::size_t k = 0; k < n_bids; ++k) m.bids.push_back(au::BuyBid{k, bids[k], 0.0, 0.0});
        for (std::size_t k = 0; k < n_asks; ++k) m.asks.push_back(au::SellBid{k, asks[k], 0.0, 0.0, 0.0, 0.0});
        const auto o = au::run(au::parse_mechanism(mechanism), m, cfg->cfg.auction.clock);
        *out = es_auction_result{o.price, o.social_welfare, o.trades(), o.rounds};
        for (std::size_t k = 0; k < o.trades() && k < cap; ++k) {
            if (winners_buy) winners_buy[k] = o.winners_buy[k];
            if (winners_sell) winners_sell[k] = o.winners_sell[k];
        }
    });
}

es_status es_accuracy_lookup(const char* model, const char* dataset, double paths, int mode, double* out) {
    return guard([&] {
        require(model != nullptr && dataset != nullptr && out != nullptr, "es_accuracy_lookup: NULL argument");
        require(mode == 0 || mode == 1, "es_accuracy_lookup: mode must be 0 (CoT) or 1 (SC-CoT)");
        *out = edgeserve::cot::accuracy_lookup(model, dataset, paths,
                                               mode ? edgeserve::cot::PromptMode::ScCoT : edgeserve::cot::PromptMode::CoT);
    });
}

es_status es_cot_bound(double input_ambiguity, const double* steps, size_t n_steps, double* out) {
    return guard([&] {
        require(out != nullptr && (steps || n_steps == 0), "es_cot_bound: NULL argument");
        *out = edgeserve::cot::cot_bound(input_ambiguity, std::span<const double>(steps, n_steps));
    });
}

}  // extern "C"
