#include "env/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edgeserve::env {

EnvState EnvState::initial(Shape shape) {
    return EnvState{Grid<int>(shape, 0), Grid<double>(shape, 0.0), Grid<double>(shape, 0.0), 0};
}

Action Action::all_offload(Shape shape) { return Action{Grid<int>(shape, 0), Grid<double>(shape, 1.0), false}; }

bool FeasibilityReport::feasible() const {
    return std::all_of(servers.begin(), servers.end(), [](const auto& s) { return s.ok(); });
}

std::size_t FeasibilityReport::violations() const {
    std::size_t v = 0;
    for (const auto& s : servers) v += !s.memory_ok + !s.edge_share_ok + !s.energy_ok;
    return v;
}

namespace {

double memory_used(const ValidatedSystem& sys, const Action& a, std::size_t n) {
    const Shape shape = sys.shape();
    double used = 0.0;
    for (std::size_t i = 0; i < shape.agents; ++i)
        for (std::size_t m = 0; m < shape.models; ++m)
            if (a.cache(n, i, m)) used += sys.model(m).size_gb;
    return used;
}

double energy_used(const ValidatedSystem& sys, const Action& a, const RequestMatrix& r, std::size_t n) {
    const Shape shape = sys.shape();
    double used = 0.0;
    for (std::size_t i = 0; i < shape.agents; ++i)
        for (std::size_t m = 0; m < shape.models; ++m)
            used += sys.model(m).compute_per_token * a.cache(n, i, m) * (1.0 - a.offload(n, i, m)) * r(n, i, m);
    return used;
}

bool within(double used, double cap) { return used <= cap * (1.0 + kCapTolerance); }

}  // namespace

FeasibilityReport check_feasibility(const ValidatedSystem& sys, const Action& action, const RequestMatrix& requests) {
    const Shape shape = sys.shape();
    FeasibilityReport rep;
    rep.servers.resize(shape.servers);
    for (std::size_t n = 0; n < shape.servers; ++n) {
        auto& s = rep.servers[n];
        s.memory_used = memory_used(sys, action, n);
        s.memory_ok = within(s.memory_used, sys.server(n).memory_cap);
        s.energy_used = energy_used(sys, action, requests, n);
        s.energy_ok = within(s.energy_used, sys.server(n).energy_cap);
        for (std::size_t i = 0; i < shape.agents; ++i)
            for (std::size_t m = 0; m < shape.models; ++m) {
                const double edge_share = (1.0 - action.offload(n, i, m)) * (requests(n, i, m) > 0 ? 1.0 : 0.0);
                if (edge_share > action.cache(n, i, m)) s.edge_share_ok = false;
            }
    }
    return rep;
}

Action repair_action(const ValidatedSystem& sys, const Action& raw, const RequestMatrix& requests) {
    const Shape shape = sys.shape();
    Action out = raw;
    bool changed = false;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        int a = out.cache[k] != 0 ? 1 : 0;
        double b = std::clamp(std::isnan(out.offload[k]) ? 1.0 : out.offload[k], 0.0, 1.0);
        changed |= a != out.cache[k] || b != out.offload[k];
        out.cache[k] = a;
        out.offload[k] = b;
    }

    if (!changed && check_feasibility(sys, out, requests).feasible()) return out;

    for (std::size_t n = 0; n < shape.servers; ++n) {
        const auto& server = sys.server(n);

        // (i) memory: evict ascending demand, then larger model, then index.
        if (!within(memory_used(sys, out, n), server.memory_cap)) {
            std::vector<std::size_t> cached;
            for (std::size_t c = 0; c < shape.per_server(); ++c)
                if (out.cache.server(n)[c]) cached.push_back(c);
            std::stable_sort(cached.begin(), cached.end(), [&](std::size_t x, std::size_t y) {
                const int rx = requests.server(n)[x], ry = requests.server(n)[y];
                if (rx != ry) return rx < ry;
                const double sx = sys.model(x % shape.models).size_gb, sy = sys.model(y % shape.models).size_gb;
                if (sx != sy) return sx > sy;
                return x < y;
            });
            double used = memory_used(sys, out, n);
            for (std::size_t c : cached) {
                if (within(used, server.memory_cap)) break;
                out.cache.server(n)[c] = 0;
                used -= sys.model(c % shape.models).size_gb;
                changed = true;
            }
        }

        // (ii) uncached demand goes to the cloud.
        for (std::size_t c = 0; c < shape.per_server(); ++c) {
            if (!out.cache.server(n)[c] && requests.server(n)[c] > 0 && out.offload.server(n)[c] != 1.0) {
                out.offload.server(n)[c] = 1.0;
                changed = true;
            }
        }

        // (iii) energy: offload the heaviest edge load first, exactly to the cap.
        double load = energy_used(sys, out, requests, n);
        if (!within(load, server.energy_cap)) {
            std::vector<std::size_t> cand;
            for (std::size_t c = 0; c < shape.per_server(); ++c)
                if (out.cache.server(n)[c] && requests.server(n)[c] > 0 && out.offload.server(n)[c] < 1.0)
                    cand.push_back(c);
            auto weight = [&](std::size_t c) {
                return sys.model(c % shape.models).compute_per_token * requests.server(n)[c];
            };
            std::stable_sort(cand.begin(), cand.end(), [&](std::size_t x, std::size_t y) {
                const double wx = weight(x), wy = weight(y);
                if (wx != wy) return wx > wy;
                return x < y;
            });
            for (std::size_t c : cand) {
                const double excess = load - server.energy_cap;
                if (excess <= 0.0) break;
                double& b = out.offload.server(n)[c];
                const double full = weight(c);
                const double cell = full * (1.0 - b);
                if (cell > excess) {
                    b = 1.0 - (cell - excess) / full;
                } else {
                    b = 1.0;
                }
                changed = true;
                load = energy_used(sys, out, requests, n);
            }
        }
    }
    out.repaired = raw.repaired || changed;
    return out;
}

double tokens_per_path(int cache, double offload, int requests, double thought_len) {
    return cache * (1.0 - offload) * requests * thought_len;
}

double tokens_executed(int cache, double offload, int requests, int paths, double thought_len) {
    return tokens_per_path(cache, offload, requests, thought_len) * paths;
}

std::pair<EnvState, StepOutcome> step(const ValidatedSystem& sys, const EnvState& state, const Action& action,
                                      const RequestMatrix& requests) {
    const Shape shape = sys.shape();
    EnvState next = state;
    next.slot = state.slot + 1;
    next.cache = action.cache;

    StepOutcome out;
    out.effective = action;
    out.tokens = Grid<double>(shape, 0.0);

    for (std::size_t n = 0; n < shape.servers; ++n)
        for (std::size_t i = 0; i < shape.agents; ++i)
            for (std::size_t m = 0; m < shape.models; ++m) {
                const std::size_t k = shape.index(n, i, m);
                const auto& agent = sys.agent(i);
                const auto& p = sys.params(i, m);
                const int a = action.cache[k];
                if (!a) {
                    next.tokens[k] = 0.0;
                    next.aot[k] = 0.0;
                    continue;
                }
                const double delta =
                    tokens_executed(a, action.offload[k], requests[k], p.paths, agent.thought_len);
                const double tokens = state.tokens[k] + delta;
                if (tokens > sys.model(m).context_window) {
                    next.cache[k] = 0;
                    next.tokens[k] = 0.0;
                    next.aot[k] = 0.0;
                    out.effective.cache[k] = 0;
                    if (requests[k] > 0) out.effective.offload[k] = 1.0;
                    out.evicted.push_back(k);
                    continue;
                }
                next.tokens[k] = tokens;
                next.aot[k] = std::max(state.aot[k] + agent.consensus * delta - p.vanishing, 0.0);
                out.tokens[k] = delta;
                out.total_tokens += delta;
            }
    return {std::move(next), std::move(out)};
}

}  // namespace edgeserve::env
