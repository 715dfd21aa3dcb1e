#include "cot/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "common/error.hpp"
#include "json.hpp"

namespace edgeserve::cot {
namespace {

void check_row(const std::vector<double>& row, const std::string& what) {
    double s = 0.0;
    for (double p : row) {
        if (!(p >= 0.0)) throw DomainError(what + ": negative probability");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw DomainError(what + ": row does not sum to 1");
}

void check_table(const CategoricalWorld& w, const std::vector<std::vector<double>>& t, const std::string& what) {
    if (t.size() != w.contexts()) throw DomainError(what + ": one row per context required");
    for (const auto& row : t) {
        if (row.size() != t.front().size()) throw DomainError(what + ": ragged table");
        check_row(row, what);
    }
}

// Posterior over contexts, unnormalised, for a set of observations.
std::vector<double> joint(const CategoricalWorld& w, const WorldQuery& q) {
    std::vector<double> out(w.contexts());
    for (std::size_t c = 0; c < w.contexts(); ++c) {
        double p = w.prior[c] * w.input_table[c][q.input];
        for (const auto& path : q.paths)
            for (std::size_t s : path) p *= w.step_table[c][s];
        out[c] = p;
    }
    return out;
}

double true_share(const CategoricalWorld& w, const std::vector<double>& weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("observation has zero probability under every context");
    return weights[w.true_context] / total;
}

}  // namespace

void validate_world(const CategoricalWorld& w, const WorldQuery& q) {
    if (w.contexts() == 0) throw DomainError("world has no contexts");
    if (w.true_context >= w.contexts()) throw DomainError("true context out of range");
    check_row(w.prior, "prior");
    check_table(w, w.input_table, "input_table");
    check_table(w, w.step_table, "step_table");
    check_table(w, w.answer_table, "answer_table");
    if (q.input >= w.input_table.front().size()) throw DomainError("input symbol out of range");
    for (const auto& path : q.paths)
        for (std::size_t s : path)
            if (s >= w.step_table.front().size()) throw DomainError("step symbol out of range");
}

double symbol_ambiguity(const CategoricalWorld& w, const std::vector<std::vector<double>>& table, std::size_t symbol) {
    std::vector<double> weights(w.contexts());
    for (std::size_t c = 0; c < w.contexts(); ++c) weights[c] = w.prior[c] * table[c][symbol];
    return 1.0 - true_share(w, weights);
}

double path_ambiguity(const CategoricalWorld& w, const std::vector<std::size_t>& path) {
    std::vector<double> weights(w.contexts());
    for (std::size_t c = 0; c < w.contexts(); ++c) {
        double p = w.prior[c];
        for (std::size_t s : path) p *= w.step_table[c][s];
        weights[c] = p;
    }
    return 1.0 - true_share(w, weights);
}

bool satisfies_assumptions(const CategoricalWorld& w, const WorldQuery& q) {
    const double uniform = 1.0 / static_cast<double>(w.contexts());
    for (double p : w.prior)
        if (std::abs(p - uniform) > 1e-12) return false;
    if (symbol_ambiguity(w, w.input_table, q.input) > 0.5) return false;
    for (const auto& path : q.paths) {
        double prev = 1.0;
        for (std::size_t y = 0; y < path.size(); ++y) {
            if (symbol_ambiguity(w, w.step_table, path[y]) > 0.5) return false;
            std::vector<std::size_t> prefix(path.begin(), path.begin() + static_cast<long>(y) + 1);
            const double e = path_ambiguity(w, prefix);
            if (e > prev + 1e-15) return false;
            prev = e;
        }
    }
    return true;
}

BoundInputs bound_inputs(const CategoricalWorld& w, const WorldQuery& q) {
    BoundInputs in;
    in.input_ambiguity = symbol_ambiguity(w, w.input_table, q.input);
    in.consensus = w.consensus;
    in.skewness = 1.0;
    for (const auto& path : q.paths) {
        std::vector<double> steps;
        for (std::size_t s : path) steps.push_back(symbol_ambiguity(w, w.step_table, s));
        in.step_ambiguity.push_back(std::move(steps));
        in.path_ambiguity.push_back(path_ambiguity(w, path));
    }
    return in;
}

double empirical_gap(const CategoricalWorld& w, const WorldQuery& q) {
    if (w.contexts() > kMaxContexts) throw DomainError("empirical_gap: too large (contexts)");
    for (const auto& path : q.paths)
        if (path.size() > kMaxSteps) throw DomainError("empirical_gap: too large (chain length)");
    validate_world(w, q);

    const auto weights = joint(w, q);
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("empirical_gap: observation has zero probability");

    double gap = 0.0;
    const std::size_t answers = w.answer_table.front().size();
    for (std::size_t d = 0; d < answers; ++d) {
        double predictive = 0.0;
        for (std::size_t c = 0; c < w.contexts(); ++c) predictive += weights[c] / total * w.answer_table[c][d];
        gap = std::max(gap, std::abs(predictive - w.answer_table[w.true_context][d]));
    }
    return gap;
}

std::vector<WorldFixture> load_world_fixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open world fixtures '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("world fixtures: ") + e.what());
    }
    std::vector<WorldFixture> out;
    for (const auto& j : doc.at("worlds")) {
        WorldFixture f;
        f.world.name = j.at("name").get<std::string>();
        f.world.true_context = j.at("true_context").get<std::size_t>();
        f.world.prior = j.at("prior").get<std::vector<double>>();
        f.world.input_table = j.at("input_table").get<std::vector<std::vector<double>>>();
        f.world.step_table = j.at("step_table").get<std::vector<std::vector<double>>>();
        f.world.answer_table = j.at("answer_table").get<std::vector<std::vector<double>>>();
        f.world.consensus = j.value("consensus", 1.0);
        f.query.input = j.at("input").get<std::size_t>();
        f.query.paths = j.at("paths").get<std::vector<std::vector<std::size_t>>>();
        f.expect_assumptions = j.value("expect_assumptions", true);
        f.pinned_gap = j.value("pinned_gap", -1.0);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace edgeserve::cot
