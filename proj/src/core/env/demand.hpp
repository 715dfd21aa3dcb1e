#pragma once

#include <cstdint>
#include <vector>

#include "common/grid.hpp"
#include "env/spec.hpp"

namespace edgeserve::env {

using RequestMatrix = Grid<int>;

/// Zipf popularity over the (agent, model) pairs an agent actually uses,
/// times a Poisson request volume per server and slot.
struct DemandModel {
    double zipf_s = 1.0;
    std::vector<double> mean_volume;    // per server; a single entry applies to all
    std::uint64_t popularity_seed = 0;  // 0: rank pairs in (agent, model) index order

    double volume(std::size_t n) const {
        if (mean_volume.empty()) return 0.0;
        return mean_volume.size() == 1 ? mean_volume.front() : mean_volume.at(n);
    }
};

/// Popularity weight of every (agent, model) cell of server n, normalised to
/// sum to one over the cells in use. Unused cells get zero.
std::vector<double> popularity_weights(const ValidatedSystem& sys, const DemandModel& demand, std::size_t n);

/// Requests for slot t. Depends only on (seed, t), never on past actions, so
/// policies evaluated with the same seed see identical traces.
RequestMatrix generate_requests(const ValidatedSystem& sys, const DemandModel& demand, std::uint64_t seed,
                                std::uint64_t t);

}  // namespace edgeserve::env
