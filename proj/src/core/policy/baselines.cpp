#include "policy/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace edgeserve::policy {

Observation observe(const env::EnvState& state, const env::RequestMatrix& requests) {
    return Observation{state.cache, requests, state.aot};
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    if (name == "fifo") return PolicyKind::Fifo;
    if (name == "lfu") return PolicyKind::Lfu;
    if (name == "laot") return PolicyKind::LeastAot;
    if (name == "cloud") return PolicyKind::CloudOnly;
    return std::nullopt;
}

std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Fifo: return "fifo";
        case PolicyKind::Lfu: return "lfu";
        case PolicyKind::LeastAot: return "laot";
        case PolicyKind::CloudOnly: return "cloud";
    }
    return "?";
}

Bookkeeping Bookkeeping::empty(Shape shape) {
    return Bookkeeping{Grid<std::uint64_t>(shape, 0), Grid<double>(shape, 0.0), 0};
}

env::Action decide(PolicyKind kind, const Observation& obs, const env::ValidatedSystem& sys, const Bookkeeping& book) {
    const Shape shape = sys.shape();
    if (kind == PolicyKind::CloudOnly) return env::Action::all_offload(shape);

    env::Action act{obs.cache, Grid<double>(shape, 1.0), false};
    for (std::size_t n = 0; n < shape.servers; ++n) {
        auto cache = act.cache.server(n);
        const auto req = obs.requests.server(n);
        const double cap = sys.server(n).memory_cap;
        auto size = [&](std::size_t c) { return sys.model(c % shape.models).size_gb; };
        auto key = [&](std::size_t c) -> double {
            switch (kind) {
                case PolicyKind::Fifo: return static_cast<double>(book.inserted_at.server(n)[c]);
                case PolicyKind::Lfu: return book.hits.server(n)[c];
                case PolicyKind::LeastAot: return obs.aot.server(n)[c];
                default: return 0.0;
            }
        };

        std::vector<std::size_t> order;
        for (std::size_t c = 0; c < shape.per_server(); ++c)
            if (req[c] > 0) order.push_back(c);
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return req[x] > req[y]; });

        std::vector<char> claimed(shape.per_server(), 0);
        double used = 0.0;
        for (std::size_t c = 0; c < shape.per_server(); ++c)
            if (cache[c]) used += size(c);

        for (std::size_t c : order) {
            if (cache[c]) {
                claimed[c] = 1;
                continue;
            }
            if (claimed[c]) continue;  // displaced earlier in this slot
            std::vector<std::size_t> victims;
            double freeable = 0.0;
            for (std::size_t v = 0; v < shape.per_server(); ++v)
                if (cache[v] && !claimed[v]) {
                    victims.push_back(v);
                    freeable += size(v);
                }
            if (used + size(c) > cap + freeable) continue;
            std::stable_sort(victims.begin(), victims.end(), [&](auto x, auto y) {
                const double kx = key(x), ky = key(y);
                if (kx != ky) return kx < ky;
                return req[x] < req[y];
            });
            for (std::size_t v : victims) {
                if (used + size(c) <= cap) break;
                cache[v] = 0;
                claimed[v] = 1;
                used -= size(v);
            }
            cache[c] = 1;
            used += size(c);
            claimed[c] = 1;
        }
        for (std::size_t c = 0; c < shape.per_server(); ++c)
            act.offload.server(n)[c] = cache[c] ? 0.0 : 1.0;
    }
    return act;
}

Bookkeeping bookkeeping_update(PolicyKind kind, const Bookkeeping& book, const Observation& obs,
                               const env::Action& effective) {
    if (kind == PolicyKind::CloudOnly) return book;
    Bookkeeping out = book;
    for (std::size_t k = 0; k < effective.cache.size(); ++k) {
        if (!effective.cache[k]) {
            out.inserted_at[k] = 0;
            continue;
        }
        if (!obs.cache[k]) out.inserted_at[k] = ++out.clock;
        out.hits[k] += obs.requests[k];
    }
    return out;
}

}  // namespace edgeserve::policy
