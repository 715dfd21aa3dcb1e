#pragma once

#include <span>
#include <vector>

#include "env/dynamics.hpp"
#include "env/spec.hpp"

namespace edgeserve::cost {

/// Slot cost split into the four edge parts and the cloud part.
struct CostBreakdown {
    double switching = 0.0;
    double transmission = 0.0;
    double computation = 0.0;
    double accuracy = 0.0;
    double cloud = 0.0;
    double total = 0.0;

    double edge() const { return switching + transmission + computation + accuracy; }
    CostBreakdown& operator+=(const CostBreakdown& o);
};

/// Sets total to the exact sum of the five components.
CostBreakdown finalize(CostBreakdown b);

// Cell-level terms. All are linear in their cost coefficient.

double switching_cost(std::span<const int> prev_cache, std::span<const int> cache, double switch_unit);
double transmission_cost(double requests, double offload, double input_size, double edge_tx_unit);
double computation_cost(double tokens_per_path, int paths, double compute_per_token, double compute_cap);

/// alpha * kappa * ln(1/beta), clamped to [0, 1].
double accuracy_value(double alpha, double beta, double aot);
/// weight * (1 - alpha) / (max(kappa, 1) ln(1/beta)) * R * a * (1 - b).
double accuracy_cost(double alpha, double beta, double aot, double requests, int cache, double offload, double weight);
double cloud_cost(double offload, double requests, int paths, double cloud_unit);

double edge_cost(const CostBreakdown& b);

/// Horizon average of edge + cloud cost; throws DomainError on an empty trace.
double total_cost(std::span<const CostBreakdown> trace);

/// Negative slot cost.
double reward(const CostBreakdown& b);

/// Full slot breakdown, summed over servers. `prev_cache` is the cache
/// matrix of the previous slot, `outcome` carries the effective action and
/// tokens, `next` the post-step ages of thought.
CostBreakdown slot_cost(const env::ValidatedSystem& sys, const Grid<int>& prev_cache, const env::StepOutcome& outcome,
                        const env::EnvState& next, const env::RequestMatrix& requests);

/// Same, restricted to one server. Used for per-seller valuations.
CostBreakdown server_cost(const env::ValidatedSystem& sys, std::size_t n, const Grid<int>& prev_cache,
                          const env::StepOutcome& outcome, const env::EnvState& next,
                          const env::RequestMatrix& requests);

}  // namespace edgeserve::cost
