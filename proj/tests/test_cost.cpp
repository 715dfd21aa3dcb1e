#include <cmath>

#include "common/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace edgeserve;
using doctest::Approx;

TEST_CASE("switching charges loads only") {
    const std::vector<int> a{1, 0, 1}, same{1, 0, 1}, one_load{1, 1, 1}, one_evict{1, 0, 0};
    CHECK(cost::switching_cost(a, same, 1e-5) == 0.0);
    CHECK(cost::switching_cost(a, one_load, 1e-5) == 1e-5);
    CHECK(cost::switching_cost(a, one_evict, 1e-5) == 0.0);
}

TEST_CASE("transmission") {
    CHECK(cost::transmission_cost(4, 1.0, 150, 1e-4) == 0.0);
    CHECK(cost::transmission_cost(4, 0.0, 150, 1e-4) == Approx(0.06));
    CHECK(cost::transmission_cost(0, 0.0, 150, 1e-4) == 0.0);
}

TEST_CASE("computation") {
    CHECK(cost::computation_cost(0.0, 3, 2.0, 312000.0) == 0.0);
    CHECK(cost::computation_cost(200.0, 1, 2.0, 312000.0) == Approx(1.282e-3).epsilon(1e-3));
    CHECK(cost::computation_cost(200.0, 4, 2.0, 624000.0) ==
          Approx(cost::computation_cost(200.0, 4, 2.0, 312000.0) / 2.0));
}

TEST_CASE("accuracy value and cost") {
    CHECK(cost::accuracy_value(0.56, 0.9, 0.0) == 0.0);
    CHECK(cost::accuracy_value(0.56, 0.9, 10.0) == Approx(0.590).epsilon(1e-3));
    CHECK(cost::accuracy_value(0.56, 0.9, 1e6) == 1.0);

    CHECK(cost::accuracy_cost(0.56, 0.9, 10.0, 1.0, 0, 0.0, 2.5) == 0.0);
    CHECK(cost::accuracy_cost(0.56, 0.9, 10.0, 1.0, 1, 0.0, 2.5) == Approx(1.044).epsilon(1e-3));
    double prev = 1e300;
    for (double k : {1.0, 10.0, 100.0, 1e4, 1e8}) {
        const double c = cost::accuracy_cost(0.56, 0.9, k, 1.0, 1, 0.0, 2.5);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(prev < 1e-6);
    // kappa below one is clamped
    CHECK(cost::accuracy_cost(0.56, 0.9, 0.0, 1.0, 1, 0.0, 2.5) ==
          cost::accuracy_cost(0.56, 0.9, 1.0, 1.0, 1, 0.0, 2.5));
}

TEST_CASE("cloud") {
    CHECK(cost::cloud_cost(0.0, 4, 5, 0.0075) == 0.0);
    CHECK(cost::cloud_cost(1.0, 4, 5, 0.0075) == Approx(0.15));
    CHECK(cost::cloud_cost(0.5, 4, 5, 0.0075) == Approx(cost::cloud_cost(1.0, 4, 5, 0.0075) / 2.0));
}

TEST_CASE("edge sum, total and reward") {
    cost::CostBreakdown z;
    CHECK(cost::edge_cost(z) == 0.0);
    const cost::CostBreakdown b = cost::finalize({0.1, 0.2, 0.3, 0.4, 0.5, 0.0});
    CHECK(cost::edge_cost(b) == Approx(1.0));
    CHECK(b.total == 0.1 + 0.2 + 0.3 + 0.4 + 0.5);

    const std::vector<cost::CostBreakdown> one{b};
    CHECK(cost::total_cost(one) == Approx(1.5));
    const std::vector<cost::CostBreakdown> two{cost::finalize({1.0, 0, 0, 0, 0, 0}),
                                               cost::finalize({0, 0, 0, 0, 3.0, 0})};
    CHECK(cost::total_cost(two) == 2.0);
    const std::vector<cost::CostBreakdown> same(7, b);
    CHECK(cost::total_cost(same) == Approx(1.5));
    CHECK_THROWS_AS(cost::total_cost(std::vector<cost::CostBreakdown>{}), DomainError);

    CHECK(cost::reward(z) == 0.0);
    CHECK(cost::reward(cost::finalize({0, 0, 0, 0, 2.5, 0})) == -2.5);
    CHECK(cost::reward(two[0]) > cost::reward(two[1]));
}

TEST_CASE("golden slot") {
    const auto g = testsupport::load_golden(EDGESERVE_FIXTURES "/cost_golden.json");
    REQUIRE(env::check_feasibility(g.sys, g.action, g.requests).feasible());
    const auto [next, out] = env::step(g.sys, g.state, g.action, g.requests);
    for (std::size_t k = 0; k < g.next_tokens.size(); ++k) {
        CHECK(next.tokens[k] == g.next_tokens[k]);
        CHECK(next.aot[k] == g.next_aot[k]);
    }
    const auto c = cost::slot_cost(g.sys, g.state.cache, out, next, g.requests);
    CHECK(testsupport::rel_err(c.switching, g.expected.switching) <= 1e-12);
    CHECK(testsupport::rel_err(c.transmission, g.expected.transmission) <= 1e-12);
    CHECK(testsupport::rel_err(c.computation, g.expected.computation) <= 1e-12);
    CHECK(testsupport::rel_err(c.accuracy, g.expected.accuracy) <= 1e-12);
    CHECK(testsupport::rel_err(c.cloud, g.expected.cloud) <= 1e-12);
    CHECK(testsupport::rel_err(c.total, g.expected.total) <= 1e-12);
}

TEST_CASE("random slots: additivity, sign and offload monotonicity") {
    Rng rng(8);
    const auto sys = env::validate_spec(testsupport::small_spec(2, 3, 2));
    const Shape sh = sys.shape();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto st = testsupport::random_state(sys, rng);
        const auto r = testsupport::random_requests(sh, rng);
        const auto a = env::repair_action(sys, testsupport::random_action(sh, rng), r);
        auto [next, out] = env::step(sys, st, a, r);
        const auto c = cost::slot_cost(sys, st.cache, out, next, r);
        CHECK(c.total == c.switching + c.transmission + c.computation + c.accuracy + c.cloud);
        CHECK(c.switching >= 0.0);
        CHECK(c.transmission >= 0.0);
        CHECK(c.computation >= 0.0);
        CHECK(c.accuracy >= 0.0);
        CHECK(c.cloud >= 0.0);

        // per-cell monotonicity in b, with kappa held fixed
        const double kappa = 5.0 + 100.0 * u(rng);
        const double lo = u(rng), hi = lo + (1.0 - lo) * u(rng);
        const double edge_lo = cost::transmission_cost(3, lo, 120, 1e-4) +
                               cost::computation_cost(env::tokens_per_path(1, lo, 3, 8), 3, 2.0, 312000.0) +
                               cost::accuracy_cost(0.6, 0.85, kappa, 3, 1, lo, 2.5);
        const double edge_hi = cost::transmission_cost(3, hi, 120, 1e-4) +
                               cost::computation_cost(env::tokens_per_path(1, hi, 3, 8), 3, 2.0, 312000.0) +
                               cost::accuracy_cost(0.6, 0.85, kappa, 3, 1, hi, 2.5);
        CHECK(edge_hi <= edge_lo);
        CHECK(cost::cloud_cost(hi, 3, 3, 0.0075) >= cost::cloud_cost(lo, 3, 3, 0.0075));
    }
}

TEST_CASE("per-server costs add up to the slot cost") {
    Rng rng(2);
    const auto sys = env::validate_spec(testsupport::small_spec(3, 2, 2));
    for (int trial = 0; trial < 200; ++trial) {
        const auto st = testsupport::random_state(sys, rng);
        const auto r = testsupport::random_requests(sys.shape(), rng);
        const auto a = env::repair_action(sys, testsupport::random_action(sys.shape(), rng), r);
        auto [next, out] = env::step(sys, st, a, r);
        const auto c = cost::slot_cost(sys, st.cache, out, next, r);
        double sum = 0.0;
        for (std::size_t n = 0; n < 3; ++n) sum += cost::server_cost(sys, n, st.cache, out, next, r).total;
        CHECK(c.total == Approx(sum).epsilon(1e-12));
    }
}
