#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "cost/cost_model.hpp"
#include "learn/tape.hpp"

namespace edgeserve::learn {

struct StepResult {
    Vec obs;
    double reward = 0.0;
    bool done = false;
    cost::CostBreakdown cost;   // zero for environments without a cost model
    std::size_t evictions = 0;  // context-window overflows this step
    std::size_t violations = 0; // constraint violations after repair (should stay 0)
    // Reasoning quality of the slot: request-weighted sums and their weight.
    double edge_accuracy = 0.0;   // sum of R a (1 - b) A(kappa)
    double edge_requests = 0.0;   // sum of R a (1 - b)
    double table_accuracy = 0.0;  // sum of R * table accuracy at J paths
    double requests = 0.0;
};

/// What the learner needs from a world: fixed-size observations, a vector of
/// binary decisions, and optionally one fraction per binary decision.
class Env {
public:
    virtual ~Env() = default;
    virtual std::size_t obs_dim() const = 0;
    virtual std::size_t bits() const = 0;
    virtual std::size_t fractions() const = 0;
    virtual std::size_t horizon() const = 0;
    /// Starts an episode whose randomness is fully determined by the seed.
    virtual Vec reset(std::uint64_t episode_seed) = 0;
    virtual StepResult step(const std::vector<int>& bits, const std::vector<double>& fractions) = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>()>;

}  // namespace edgeserve::learn
