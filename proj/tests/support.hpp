// Helpers shared by the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "cost/cost_model.hpp"
#include "cot/world.hpp"
#include "env/dynamics.hpp"
#include "env/spec.hpp"
#include "json.hpp"

namespace testsupport {

using namespace edgeserve;

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

/// N servers x I agents x M models with simple round numbers.
inline env::SystemSpec small_spec(std::size_t servers, std::size_t agents, std::size_t models) {
    env::SystemSpec s;
    for (std::size_t n = 0; n < servers; ++n)
        s.servers.push_back(env::ServerSpec{"es" + std::to_string(n), 200.0, 5000.0, 312000.0, {1e-4}});
    for (std::size_t m = 0; m < models; ++m)
        s.models.push_back(env::ModelSpec{"m" + std::to_string(m), 40.0 + 20.0 * m, 2.0 + m, 1000.0, 0.0075});
    for (std::size_t i = 0; i < agents; ++i) {
        env::AgentSpec a;
        a.name = "a" + std::to_string(i);
        a.input_size = 100.0 + 50.0 * i;
        a.thought_len = 5.0 + i;
        a.consensus = 0.5 + 0.25 * i;
        for (std::size_t m = 0; m < models; ++m)
            a.per_model.push_back(env::AgentModelParams{true, 0.5 + 0.05 * m, 0.9 - 0.05 * i, 1 + static_cast<int>(m + i),
                                                        1.0 + static_cast<double>(m)});
        s.agents.push_back(a);
    }
    s.coefficients.switch_unit = 1e-5;
    s.coefficients.accuracy_weight = 2.5;
    return s;
}

inline env::Action random_action(Shape shape, Rng& rng) {
    std::bernoulli_distribution bit(0.6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    env::Action a{Grid<int>(shape, 0), Grid<double>(shape, 0.0), false};
    for (std::size_t k = 0; k < shape.size(); ++k) {
        a.cache[k] = bit(rng) ? 1 : 0;
        const double r = u(rng);
        a.offload[k] = r < 0.2 ? 0.0 : (r > 0.8 ? 1.0 : u(rng));
    }
    return a;
}

inline env::RequestMatrix random_requests(Shape shape, Rng& rng, int max_r = 6) {
    std::uniform_int_distribution<int> d(0, max_r);
    env::RequestMatrix r(shape, 0);
    for (std::size_t k = 0; k < shape.size(); ++k) r[k] = d(rng);
    return r;
}

/// Random reachable-looking state: cached cells carry tokens below the window.
inline env::EnvState random_state(const env::ValidatedSystem& sys, Rng& rng) {
    const Shape shape = sys.shape();
    std::bernoulli_distribution bit(0.5);
    env::EnvState s = env::EnvState::initial(shape);
    for (std::size_t n = 0; n < shape.servers; ++n)
        for (std::size_t i = 0; i < shape.agents; ++i)
            for (std::size_t m = 0; m < shape.models; ++m) {
                const std::size_t k = shape.index(n, i, m);
                if (!bit(rng)) continue;
                s.cache[k] = 1;
                std::uniform_real_distribution<double> tok(0.0, sys.model(m).context_window);
                s.tokens[k] = std::floor(tok(rng));
                s.aot[k] = std::floor(tok(rng) * 0.5);
            }
    return s;
}

/// Straight-line token / age-of-thought recurrence for one cell, written
/// independently of the simulator:
///   K_t = a (K_{t-1} + delta),  kappa_t = a max(kappa_{t-1} + zeta delta - Delta, 0)
/// with delta = a (1 - b) R J k and eviction when K_t exceeds the window.
struct CellNext {
    int cache;
    double tokens;
    double aot;
    bool evicted;
};

inline CellNext oracle_cell(int a, double b, int r, int paths, double k, double zeta, double vanish, double window,
                            double prev_tokens, double prev_aot) {
    if (a == 0) return {0, 0.0, 0.0, false};
    double delta = 0.0;
    for (int j = 0; j < paths; ++j) delta += (1.0 - b) * r * k;
    const double tokens = prev_tokens + delta;
    if (tokens > window) return {0, 0.0, 0.0, true};
    double aot = prev_aot + zeta * delta - vanish;
    if (aot < 0.0) aot = 0.0;
    return {1, tokens, aot, false};
}

/// Compares step() against the oracle on one draw; returns the number of
/// mismatching cells.
inline std::size_t recurrence_mismatches(const env::ValidatedSystem& sys, const env::EnvState& state,
                                         const env::Action& action, const env::RequestMatrix& req) {
    const Shape shape = sys.shape();
    const auto [next, out] = env::step(sys, state, action, req);
    std::size_t bad = 0;
    for (std::size_t n = 0; n < shape.servers; ++n)
        for (std::size_t i = 0; i < shape.agents; ++i)
            for (std::size_t m = 0; m < shape.models; ++m) {
                const std::size_t k = shape.index(n, i, m);
                const auto& p = sys.params(i, m);
                const auto& ag = sys.agent(i);
                const CellNext o = oracle_cell(action.cache[k], action.offload[k], req[k], p.paths, ag.thought_len,
                                               ag.consensus, p.vanishing, sys.model(m).context_window,
                                               state.tokens[k], state.aot[k]);
                const bool ev = std::find(out.evicted.begin(), out.evicted.end(), k) != out.evicted.end();
                const auto close = [](double x, double y) {
                    return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y));
                };
                if (next.cache[k] != o.cache || !close(next.tokens[k], o.tokens) || !close(next.aot[k], o.aot) ||
                    ev != o.evicted)
                    ++bad;
            }
    return bad;
}

struct Golden {
    env::ValidatedSystem sys;
    env::EnvState state;
    env::Action action;
    env::RequestMatrix requests;
    std::vector<double> next_tokens, next_aot;
    cost::CostBreakdown expected;
};

inline Golden load_golden(const std::string& path) {
    const auto j = read_json(path);
    const auto& js = j.at("system");
    env::SystemSpec s;
    for (const auto& sv : js.at("servers"))
        s.servers.push_back(env::ServerSpec{"es", sv.at("memory_cap"), sv.at("energy_cap"), sv.at("compute_cap"),
                                            sv.at("edge_tx_unit").get<std::vector<double>>()});
    for (const auto& m : js.at("models"))
        s.models.push_back(
            env::ModelSpec{m.at("name"), m.at("size_gb"), m.at("compute_per_token"), m.at("context_window"),
                           m.at("cloud_unit")});
    for (const auto& a : js.at("agents")) {
        env::AgentSpec ag;
        ag.name = "agent";
        ag.input_size = a.at("input_size");
        ag.thought_len = a.at("thought_len");
        ag.consensus = a.at("consensus");
        for (const auto& p : a.at("per_model"))
            ag.per_model.push_back(env::AgentModelParams{true, p.at("alpha"), p.at("beta"), p.at("paths"),
                                                         p.at("vanishing")});
        s.agents.push_back(ag);
    }
    s.coefficients.switch_unit = js.at("switch_unit");
    s.coefficients.accuracy_weight = js.at("accuracy_weight");
    auto sys = env::validate_spec(s);
    const Shape shape = sys.shape();

    auto grid_i = [&](const nlohmann::json& v) {
        Grid<int> g(shape, 0);
        for (std::size_t k = 0; k < shape.size(); ++k) g[k] = v.at(k).get<int>();
        return g;
    };
    auto grid_d = [&](const nlohmann::json& v) {
        Grid<double> g(shape, 0.0);
        for (std::size_t k = 0; k < shape.size(); ++k) g[k] = v.at(k).get<double>();
        return g;
    };
    env::EnvState st{grid_i(j.at("prev_cache")), grid_d(j.at("tokens")), grid_d(j.at("aot")), 3};
    env::Action act{grid_i(j.at("action").at("cache")), grid_d(j.at("action").at("offload")), false};
    const auto& e = j.at("expected");
    cost::CostBreakdown exp{e.at("switching"), e.at("transmission"), e.at("computation"),
                            e.at("accuracy"),  e.at("cloud"),        e.at("total")};
    return Golden{sys,
                  st,
                  act,
                  grid_i(j.at("requests")),
                  j.at("expected_next").at("tokens").get<std::vector<double>>(),
                  j.at("expected_next").at("aot").get<std::vector<double>>(),
                  exp};
}

inline double rel_err(double got, double want) {
    if (want == 0.0) return std::abs(got);
    return std::abs(got - want) / std::abs(want);
}

struct TableRow {
    std::string model, dataset;
    int paths;
    double cot, sc;
};

inline std::vector<TableRow> read_tables(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<TableRow> rows;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        TableRow r;
        std::string f;
        std::getline(ss, r.model, ',');
        std::getline(ss, f, ',');
        r.paths = std::stoi(f);
        std::getline(ss, r.dataset, ',');
        std::getline(ss, f, ',');
        r.cot = std::stod(f);
        std::getline(ss, f, ',');
        r.sc = std::stod(f);
        rows.push_back(r);
    }
    return rows;
}

// Independent enumeration: posterior over contexts given the prompt and all
// path steps, then the largest answer-probability gap to the true context.
inline double enumerate_gap(const edgeserve::cot::CategoricalWorld& w, const edgeserve::cot::WorldQuery& q) {
    std::vector<double> post(w.contexts());
    for (std::size_t c = 0; c < w.contexts(); ++c) {
        double p = w.prior[c] * w.input_table[c][q.input];
        for (const auto& path : q.paths)
            for (std::size_t s : path) p *= w.step_table[c][s];
        post[c] = p;
    }
    double z = 0.0;
    for (double p : post) z += p;
    double gap = 0.0;
    for (std::size_t d = 0; d < w.answer_table[0].size(); ++d) {
        double mix = 0.0;
        for (std::size_t c = 0; c < w.contexts(); ++c) mix += post[c] / z * w.answer_table[c][d];
        gap = std::max(gap, std::abs(mix - w.answer_table[w.true_context][d]));
    }
    return gap;
}

}  // namespace testsupport
