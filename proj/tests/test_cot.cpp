#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "cot/bounds.hpp"
#include "cot/tables.hpp"
#include "cot/world.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace edgeserve;
using namespace edgeserve::cot;
using doctest::Approx;


TEST_CASE("ambiguity decay") {
    const AmbiguityModel m{0.5, 0.1};
    CHECK(ambiguity(m, 1.0) == 0.5);
    CHECK(ambiguity(m, 11.0) == Approx(0.1839).epsilon(1e-3));
    CHECK(ambiguity(m, 1e6) < 1e-9);
    CHECK_THROWS_AS(ambiguity(m, 0.5), DomainError);
    double prev = 1.0;
    for (double len = 1.0; len < 200.0; len += 0.7) {
        const double e = ambiguity(m, len);
        CHECK(e <= prev);
        CHECK(e <= m.sigma);
        prev = e;
    }
}

TEST_CASE("length threshold") {
    const AmbiguityModel m{0.5, 0.1};
    CHECK(length_threshold(m, 0.5) == 1);
    CHECK(length_threshold(m, ambiguity(m, 11.0)) == 11);
    // the rounded value 0.1839 sits just below 0.5/e, so one more step is needed
    CHECK(length_threshold(m, 0.1839) == 12);
    CHECK_THROWS_AS(length_threshold(m, -0.1), DomainError);

    for (double target : {0.4, 0.25, 0.1, 0.05, 0.01, 1e-3, 1e-5}) {
        for (const AmbiguityModel mm : {m, AmbiguityModel{0.3, 0.02}, AmbiguityModel{0.5, 1.5}}) {
            std::uint64_t scan = 0;
            for (std::uint64_t k = 1; k <= 100000; ++k)
                if (ambiguity(mm, static_cast<double>(k)) <= target) {
                    scan = k;
                    break;
                }
            if (scan == 0) continue;
            CAPTURE(target);
            CHECK(length_threshold(mm, target) == scan);
        }
    }
}

TEST_CASE("cot bound") {
    const std::vector<double> zero{0.1, 0.0, 0.2};
    CHECK(cot_bound(0.2, zero) == 0.0);
    const std::vector<double> two{0.1, 0.1};
    CHECK(cot_bound(0.2, two) == Approx(0.5 / 81.0));
    CHECK(cot_bound(0.2, two) == Approx(6.17e-3).epsilon(1e-3));
    const std::vector<double> bad{0.1, 1.0};
    CHECK_THROWS_AS(cot_bound(0.2, bad), DomainError);
    CHECK_THROWS_AS(cot_bound(1.0, two), DomainError);

    Rng rng(4);
    std::uniform_real_distribution<double> u(0.0, 0.9);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> s{u(rng), u(rng), u(rng)};
        const double e0 = u(rng);
        const double base = cot_bound(e0, s);
        auto s2 = s;
        s2[t % 3] = std::min(0.95, s2[t % 3] + 0.01);
        CHECK(cot_bound(e0, s2) >= base);
        CHECK(cot_bound(std::min(0.95, e0 + 0.01), s) >= base);
        CHECK(base > 0.0);
    }
}

TEST_CASE("sc-cot bound") {
    BoundInputs in;
    in.input_ambiguity = 0.2;
    in.consensus = 1.0;
    in.step_ambiguity = {{0.1, 0.1}};
    const auto one = sc_cot_bound(in);
    const std::vector<double> steps{0.1, 0.1};
    CHECK(one.max_over_paths == Approx(cot_bound(0.2, steps)));
    CHECK_FALSE(one.over_paths.has_value());

    in.consensus = 2.0;
    const auto doubled = sc_cot_bound(in);
    CHECK(doubled.max_over_paths == Approx(2.0 * one.max_over_paths));
    CHECK(doubled.max_over_paths == Approx(1.234e-2).epsilon(1e-3));

    in.step_ambiguity = {{0.1, 0.1}, {0.3}, {0.05, 0.2}};
    in.path_ambiguity = {0.2, 0.3, 0.1};
    const auto many = sc_cot_bound(in);
    REQUIRE(many.per_path.size() == 3);
    CHECK(many.max_over_paths == *std::max_element(many.per_path.begin(), many.per_path.end()));
    REQUIRE(many.over_paths.has_value());
    const double eta = 2.0 * 2.0 * 0.2 / 0.8;
    CHECK(*many.over_paths == Approx(eta * (0.2 / 0.8) * (0.3 / 0.7) * (0.1 / 0.9)));
}

TEST_CASE("consensus") {
    const std::vector<std::string> a{"A", "A", "B"}, tie{"B", "A"}, same(20, "A");
    CHECK(consensus(a) == "A");
    CHECK(consensus(tie) == "A");
    CHECK(consensus(same) == "A");
    CHECK_THROWS_AS(consensus(std::vector<std::string>{}), DomainError);

    std::vector<std::string> v{"x", "y", "y", "z", "x", "y", "w"};
    const auto want = consensus(v);
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        std::shuffle(v.begin(), v.end(), rng);
        CHECK(consensus(v) == want);
    }
}

TEST_CASE("accuracy tables") {
    const auto rows = testsupport::read_tables(EDGESERVE_DATA "/tables.csv");
    REQUIRE(rows.size() == 70);
    std::size_t checked = 0;
    for (const auto& r : rows) {
        CAPTURE(r.model);
        CAPTURE(r.dataset);
        CAPTURE(r.paths);
        CHECK(accuracy_lookup(r.model, r.dataset, r.paths, PromptMode::CoT) == r.cot);
        CHECK(accuracy_lookup(r.model, r.dataset, r.paths, PromptMode::ScCoT) == r.sc);
        checked += 2;
    }
    CHECK(checked == 140);
    CHECK(table_cells().size() == 140);

    CHECK(accuracy_lookup("PaLM-540B", "GSM8K", 20, PromptMode::ScCoT) == 72.0);
    CHECK(accuracy_lookup("LaMDA-137B", "MultiArith", 10, PromptMode::ScCoT) == 69.0);
    for (double p : {0.0, 3.0, 10.0, 17.5, 20.0}) CHECK(accuracy_lookup("PaLM-540B", "GSM8K", p, PromptMode::CoT) == 56.0);
    // linear between grid points
    CHECK(accuracy_lookup("PaLM-540B", "GSM8K", 7.5, PromptMode::ScCoT) == Approx((65.0 + 70.0) / 2.0));

    for (auto model : kTableModels)
        for (auto ds : kDatasets) {
            CHECK(accuracy_lookup(model, ds, 0, PromptMode::ScCoT) <= accuracy_lookup(model, ds, 0, PromptMode::CoT));
            for (std::size_t g = 1; g < kPathGrid.size(); ++g)
                CHECK(accuracy_lookup(model, ds, kPathGrid[g], PromptMode::ScCoT) >=
                      accuracy_lookup(model, ds, kPathGrid[g - 1], PromptMode::ScCoT));
        }

    CHECK_THROWS_AS(accuracy_lookup("GPT", "GSM8K", 5, PromptMode::CoT), DomainError);
    CHECK_THROWS_AS(accuracy_lookup("PaLM-540B", "Nope", 5, PromptMode::CoT), DomainError);
    CHECK_THROWS_AS(accuracy_lookup("PaLM-540B", "GSM8K", 25, PromptMode::CoT), DomainError);
}

TEST_CASE("derived calibration stays inside the open unit interval") {
    for (auto model : kTableModels)
        for (auto ds : kDatasets) {
            const auto c = derive_calibration(model, ds);
            CHECK(c.alpha > 0.0);
            CHECK(c.alpha < 1.0);
            CHECK(c.beta > 0.0);
            CHECK(c.beta < 1.0);
            CHECK(c.alpha == accuracy_lookup(model, ds, 0, PromptMode::CoT) / 100.0);
        }
    const auto g = derive_calibration("PaLM-540B", "GSM8K");
    CHECK(g.beta == Approx(1.0 - 16.0 / 100.0));
}

TEST_CASE("categorical worlds") {
    const auto fx = load_world_fixtures(EDGESERVE_FIXTURES "/worlds.json");
    REQUIRE(fx.size() >= 20);
    std::size_t valid = 0;
    for (const auto& f : fx) {
        CAPTURE(f.world.name);
        CHECK(satisfies_assumptions(f.world, f.query) == f.expect_assumptions);
        const double gap = empirical_gap(f.world, f.query);
        CHECK(gap == Approx(testsupport::enumerate_gap(f.world, f.query)).epsilon(1e-12));
        if (f.pinned_gap >= 0.0) CHECK(gap == Approx(f.pinned_gap).epsilon(1e-12));
        if (f.world.contexts() == 1) CHECK(gap == 0.0);
        if (!f.expect_assumptions) continue;
        const auto b = sc_cot_bound(bound_inputs(f.world, f.query));
        CHECK(gap <= b.max_over_paths);
        if (b.over_paths) CHECK(gap <= *b.over_paths);
        ++valid;
    }
    CHECK(valid >= 20);

    SUBCASE("pinned two-context world is 3/65") {
        auto it = std::find_if(fx.begin(), fx.end(), [](const auto& f) { return f.world.name == "pinned-two-context"; });
        REQUIRE(it != fx.end());
        CHECK(empirical_gap(it->world, it->query) == Approx(3.0 / 65.0).epsilon(1e-14));
    }
    SUBCASE("tables that do not sum to one are rejected") {
        auto w = fx.front();
        w.world.step_table[0][0] += 1e-6;
        CHECK_THROWS_AS(validate_world(w.world, w.query), DomainError);
    }
    SUBCASE("enumeration caps") {
        auto w = fx.front();
        w.query.paths = {std::vector<std::size_t>(kMaxSteps + 1, 0)};
        CHECK_THROWS_AS(empirical_gap(w.world, w.query), DomainError);
    }
}
