#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "learn/adam.hpp"
#include "learn/env.hpp"
#include "learn/network.hpp"
#include "learn/ppo.hpp"

namespace edgeserve::learn {

struct TrainConfig {
    NetConfig net;  // obs_dim, bits and fractions are taken from the env
    AdamConfig adam;
    PpoConfig ppo;
    double gamma = 0.95;
    double gae_lambda = 0.95;
    std::size_t epochs = 2000;
    std::size_t steps_per_epoch = 2000;  // rounded up to whole episodes
    std::uint64_t seed = 42;
    double reward_scale = 1.0;
    bool anneal_lr = false;  // linear decay to zero over the epochs
    bool adapt = true;  // the inner loop is part of the forward pass; must stay on
};

struct EpochStats {
    std::size_t epoch = 0;
    std::size_t steps = 0;
    std::size_t episodes = 0;
    double mean_cost = 0.0;     // mean slot cost over the epoch
    cost::CostBreakdown parts;  // mean per slot
    double mean_reward = 0.0;
    PpoStats ppo;
};

struct TrainResult {
    ActorCritic net;
    std::vector<EpochStats> curve;
};

/// Seed of training episode e.
std::uint64_t train_episode_seed(std::uint64_t seed, std::uint64_t episode);
/// Seed of evaluation episode e; shared by every policy evaluated at `seed`.
std::uint64_t eval_episode_seed(std::uint64_t seed, std::uint64_t episode);

/// Collect-then-update PPO loop. Deterministic for a fixed config.
TrainResult train(Env& env, const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch = {});

/// Called after every evaluation step with (episode, slot, result).
using StepObserver = std::function<void(std::size_t, std::size_t, const StepResult&)>;

struct EvalConfig {
    std::size_t episodes = 10;
    std::uint64_t seed = 0;
    bool adapt = true;
    bool greedy = true;
    StepObserver observer;
};

struct EvalMetrics {
    std::size_t episodes = 0;
    std::size_t slots = 0;
    double mean_cost = 0.0;  // mean slot cost
    cost::CostBreakdown parts;
    std::size_t evictions = 0;
    std::size_t violations = 0;
    double edge_accuracy = 0.0;   // request-weighted mean of A over edge-served requests
    double table_accuracy = 0.0;  // request-weighted SC-CoT table accuracy, percent
    std::vector<double> episode_costs;
};

/// Accumulates step results into evaluation metrics.
class MetricsAccumulator {
public:
    void add(const StepResult& r);
    void end_episode();
    EvalMetrics finish() const;

private:
    EvalMetrics m_;
    double episode_cost_ = 0.0;
    std::size_t episode_slots_ = 0;
    double edge_acc_ = 0.0, edge_req_ = 0.0, table_acc_ = 0.0, req_ = 0.0;
    cost::CostBreakdown sum_;
};

/// Frozen-parameter rollouts. adapt = false forces the inner rate to zero;
/// adapt = true keeps updating W from test observations. Throws
/// DomainError("empty horizon") for a zero horizon or zero episodes.
EvalMetrics evaluate(const ActorCritic& net, Env& env, const EvalConfig& cfg);

}  // namespace edgeserve::learn
