#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "edgeserve.h"

namespace {

const char* kSmall =
    "seed = 5\nhorizon = 4\n"
    "[system]\nservers = 1\ngpus_per_server = 8\nagents = 2\n"
    "[eval]\nepisodes = 1\n";

struct Config {
    es_config* p = nullptr;
    explicit Config(const char* text) { REQUIRE(es_config_parse(text, &p) == ES_OK); }
    ~Config() { es_config_free(p); }
};

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::strlen(es_version()) > 0);
    CHECK(std::string(es_status_name(ES_OK)) != std::string(es_status_name(ES_ERR_PARSE)));
    CHECK(es_exit_code(ES_OK) == 0);
    CHECK(es_exit_code(ES_ERR_INVALID_SPEC) == 2);
    CHECK(es_exit_code(ES_ERR_CONFIG) == 2);
    CHECK(es_exit_code(ES_ERR_PARSE) == 2);
    CHECK(es_exit_code(ES_ERR_NUMERIC) == 3);
    CHECK(es_exit_code(ES_ERR_IO) == 1);
    CHECK(es_exit_code(ES_ERR_INTERNAL) == 1);
}

TEST_CASE("config errors map to status codes") {
    es_config* cfg = nullptr;
    CHECK(es_config_parse("horizon = = 1", &cfg) == ES_ERR_PARSE);
    CHECK(cfg == nullptr);
    CHECK(std::string(es_last_error()).find(":1:") != std::string::npos);
    CHECK(es_config_parse("nonsense = 1", &cfg) == ES_ERR_CONFIG);
    CHECK(es_config_parse("[system]\nservers = 0", &cfg) == ES_ERR_INVALID_SPEC);
    CHECK(es_config_load("/nonexistent.toml", &cfg) == ES_ERR_IO);
    CHECK(es_config_parse(nullptr, &cfg) == ES_ERR_ARGUMENT);
    es_config_free(nullptr);

    REQUIRE(es_config_load(nullptr, &cfg) == ES_OK);
    std::uint64_t seed = 0, h1 = 0, h2 = 0;
    CHECK(es_config_seed(cfg, &seed) == ES_OK);
    CHECK(seed == 42);
    CHECK(es_config_hash(cfg, &h1) == ES_OK);
    CHECK(es_config_set_seed(cfg, 7) == ES_OK);
    CHECK(es_config_hash(cfg, &h2) == ES_OK);
    CHECK(h1 != h2);
    es_config_free(cfg);
}

TEST_CASE("environment stepping") {
    Config cfg(kSmall);
    es_env* env = nullptr;
    REQUIRE(es_env_create(cfg.p, 0, &env) == ES_OK);
    size_t cells = 0, horizon = 0;
    REQUIRE(es_env_dims(env, &cells, &horizon) == ES_OK);
    CHECK(horizon == 4);
    CHECK(cells == 1 * 2 * 2);
    REQUIRE(es_env_reset(env, 11) == ES_OK);

    std::vector<int> req(cells), cache(cells, 0), eff_cache(cells);
    std::vector<double> offload(cells, 1.0), eff_off(cells);
    CHECK(es_env_requests(env, req.data(), cells) == ES_OK);
    CHECK(es_env_requests(env, req.data(), cells - 1) == ES_ERR_ARGUMENT);

    es_cost c{};
    int done = 0;
    size_t slots = 0;
    while (!done) {
        REQUIRE(es_env_step(env, cache.data(), offload.data(), cells, &c, &done) == ES_OK);
        CHECK(c.switching == 0.0);
        CHECK(c.total == doctest::Approx(c.cloud));
        ++slots;
    }
    CHECK(slots == horizon);
    CHECK(es_env_last_action(env, eff_cache.data(), eff_off.data(), cells) == ES_OK);
    for (size_t k = 0; k < cells; ++k) CHECK(eff_cache[k] == 0);

    CHECK(es_env_step(env, cache.data(), offload.data(), cells, &c, &done) == ES_ERR_DOMAIN);
    CHECK(es_env_step(env, cache.data(), offload.data(), cells + 1, &c, &done) == ES_ERR_ARGUMENT);
    es_env_free(env);
}

TEST_CASE("auction through the C interface") {
    Config cfg("");
    const double bids[] = {10, 8, 6};
    const double asks[] = {3, 5, 9};
    es_auction_result r{};
    size_t wb[3], ws[3];
    REQUIRE(es_auction_run(cfg.p, "ida", bids, 3, asks, 3, &r, wb, ws, 3) == ES_OK);
    CHECK(r.trades == 2);
    CHECK(r.price == 6.5);
    CHECK(r.social_welfare == doctest::Approx(10.0));
    REQUIRE(es_auction_run(cfg.p, "dda", bids, 3, asks, 3, &r, wb, ws, 3) == ES_OK);
    CHECK(r.trades <= 2);
    CHECK(es_auction_run(cfg.p, "english", bids, 3, asks, 3, &r, nullptr, nullptr, 0) != ES_OK);
    CHECK(es_auction_run(cfg.p, "dda", bids, 0, asks, 3, &r, nullptr, nullptr, 0) == ES_ERR_DOMAIN);
}

TEST_CASE("accuracy lookup and bounds") {
    double v = 0.0;
    REQUIRE(es_accuracy_lookup("LaMDA-137B", "GSM8K", 0, 0, &v) == ES_OK);
    CHECK(v == 17.0);
    REQUIRE(es_accuracy_lookup("LaMDA-137B", "GSM8K", 10, 1, &v) == ES_OK);
    CHECK(v == 24.0);
    CHECK(es_accuracy_lookup("GPT-9", "GSM8K", 0, 0, &v) != ES_OK);
    CHECK(es_accuracy_lookup("LaMDA-137B", "GSM8K", 0, 5, &v) == ES_ERR_ARGUMENT);

    const double steps[] = {0.5};
    REQUIRE(es_cot_bound(0.5, steps, 1, &v) == ES_OK);
    CHECK(v == doctest::Approx(2.0));
    CHECK(es_cot_bound(1.5, steps, 1, &v) == ES_ERR_DOMAIN);
}

TEST_CASE("run reports unknown commands") {
    Config cfg(kSmall);
    es_run_options o;
    es_run_options_init(&o);
    CHECK(o.adapt == -1);
    CHECK(es_run(cfg.p, "launch", &o) == ES_ERR_ARGUMENT);
    CHECK(es_run(cfg.p, nullptr, &o) == ES_ERR_ARGUMENT);
}
