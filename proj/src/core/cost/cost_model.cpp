#include "cost/cost_model.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace edgeserve::cost {

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& o) {
    switching += o.switching;
    transmission += o.transmission;
    computation += o.computation;
    accuracy += o.accuracy;
    cloud += o.cloud;
    total += o.total;
    return *this;
}

CostBreakdown finalize(CostBreakdown b) {
    b.total = b.switching + b.transmission + b.computation + b.accuracy + b.cloud;
    return b;
}

double switching_cost(std::span<const int> prev_cache, std::span<const int> cache, double switch_unit) {
    double loads = 0.0;
    for (std::size_t k = 0; k < cache.size(); ++k)
        if (cache[k] > prev_cache[k]) loads += 1.0;
    return switch_unit * loads;
}

double transmission_cost(double requests, double offload, double input_size, double edge_tx_unit) {
    return requests * edge_tx_unit * input_size * (1.0 - offload);
}

double computation_cost(double tokens_per_path, int paths, double compute_per_token, double compute_cap) {
    double sum = 0.0;
    for (int j = 0; j < paths; ++j) sum += tokens_per_path * compute_per_token / compute_cap;
    return sum;
}

double accuracy_value(double alpha, double beta, double aot) {
    return std::clamp(alpha * aot * std::log(1.0 / beta), 0.0, 1.0);
}

double accuracy_cost(double alpha, double beta, double aot, double requests, int cache, double offload,
                     double weight) {
    if (cache == 0 || requests == 0.0 || offload >= 1.0) return 0.0;
    const double per_request = (1.0 - alpha) / (std::max(aot, 1.0) * std::log(1.0 / beta));
    return weight * per_request * requests * cache * (1.0 - offload);
}

double cloud_cost(double offload, double requests, int paths, double cloud_unit) {
    double sum = 0.0;
    for (int j = 0; j < paths; ++j) sum += cloud_unit * offload * requests;
    return sum;
}

double edge_cost(const CostBreakdown& b) { return b.switching + b.transmission + b.computation + b.accuracy; }

double total_cost(std::span<const CostBreakdown> trace) {
    if (trace.empty()) throw DomainError("total_cost: empty trace");
    double sum = 0.0;
    for (const auto& b : trace) sum += edge_cost(b) + b.cloud;
    return sum / static_cast<double>(trace.size());
}

double reward(const CostBreakdown& b) { return -(edge_cost(b) + b.cloud); }

CostBreakdown server_cost(const env::ValidatedSystem& sys, std::size_t n, const Grid<int>& prev_cache,
                          const env::StepOutcome& outcome, const env::EnvState& next,
                          const env::RequestMatrix& requests) {
    const Shape shape = sys.shape();
    const auto& act = outcome.effective;
    const auto& server = sys.server(n);
    const double weight = sys->coefficients.accuracy_weight;

    CostBreakdown b;
    b.switching = switching_cost(prev_cache.server(n), act.cache.server(n), sys->coefficients.switch_unit);
    for (std::size_t i = 0; i < shape.agents; ++i) {
        const auto& agent = sys.agent(i);
        for (std::size_t m = 0; m < shape.models; ++m) {
            const std::size_t k = shape.index(n, i, m);
            const double r = requests[k];
            if (r == 0.0) continue;
            const auto& p = sys.params(i, m);
            const auto& model = sys.model(m);
            const int a = act.cache[k];
            const double off = act.offload[k];
            if (a) {
                b.transmission += transmission_cost(r, off, agent.input_size, server.edge_tx_unit[i]);
                b.computation += computation_cost(env::tokens_per_path(a, off, requests[k], agent.thought_len),
                                                  p.paths, model.compute_per_token, server.compute_cap);
                b.accuracy +=
                    accuracy_cost(p.zero_shot_accuracy, p.reasoning_gain, next.aot[k], r, a, off, weight);
            }
            b.cloud += cloud_cost(off, r, p.paths, model.cloud_unit);
        }
    }
    return finalize(b);
}

CostBreakdown slot_cost(const env::ValidatedSystem& sys, const Grid<int>& prev_cache, const env::StepOutcome& outcome,
                        const env::EnvState& next, const env::RequestMatrix& requests) {
    CostBreakdown sum;
    for (std::size_t n = 0; n < sys.shape().servers; ++n)
        sum += server_cost(sys, n, prev_cache, outcome, next, requests);
    return finalize(sum);
}

}  // namespace edgeserve::cost
