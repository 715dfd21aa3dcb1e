#include "env/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace edgeserve::env {

std::vector<double> popularity_weights(const ValidatedSystem& sys, const DemandModel& demand, std::size_t n) {
    const Shape shape = sys.shape();
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < shape.agents; ++i)
        for (std::size_t m = 0; m < shape.models; ++m)
            if (sys.params(i, m).uses) cells.push_back(i * shape.models + m);

    if (demand.popularity_seed != 0) {
        Rng rng = make_rng(demand.popularity_seed, {n, 0x706f70ULL});
        std::shuffle(cells.begin(), cells.end(), rng);
    }

    std::vector<double> w(shape.per_server(), 0.0);
    double total = 0.0;
    for (std::size_t rank = 0; rank < cells.size(); ++rank) {
        double z = 1.0 / std::pow(static_cast<double>(rank + 1), demand.zipf_s);
        w[cells[rank]] = z;
        total += z;
    }
    if (total > 0.0)
        for (double& x : w) x /= total;
    return w;
}

RequestMatrix generate_requests(const ValidatedSystem& sys, const DemandModel& demand, std::uint64_t seed,
                                std::uint64_t t) {
    const Shape shape = sys.shape();
    RequestMatrix r(shape, 0);
    for (std::size_t n = 0; n < shape.servers; ++n) {
        const double mu = demand.volume(n);
        if (!(mu >= 0.0)) throw DomainError("demand volume must be >= 0");
        if (mu == 0.0) continue;
        Rng rng = make_rng(seed, {t, n});
        std::poisson_distribution<int> volume(mu);
        const int v = volume(rng);
        if (v == 0) continue;
        auto w = popularity_weights(sys, demand, n);
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        auto slice = r.server(n);
        for (int k = 0; k < v; ++k) ++slice[pick(rng)];
    }
    return r;
}

}  // namespace edgeserve::env
