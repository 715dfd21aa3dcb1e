#pragma once

#include "env/demand.hpp"
#include "env/dynamics.hpp"
#include "learn/env.hpp"
#include "policy/baselines.hpp"

namespace edgeserve::learn {

/// The cache/offload MDP seen by one shared policy over all servers. The
/// observation concatenates, per cell, the previous cache bit, requests
/// scaled by the server's mean volume, and the age of thoughts scaled by the
/// model's context window. Actions pass through repair before the step.
class ServingEnv : public Env {
public:
    ServingEnv(env::ValidatedSystem sys, env::DemandModel demand, std::size_t horizon);

    std::size_t obs_dim() const override { return 3 * shape_.size(); }
    std::size_t bits() const override { return shape_.size(); }
    std::size_t fractions() const override { return shape_.size(); }
    std::size_t horizon() const override { return horizon_; }

    Vec reset(std::uint64_t episode_seed) override;
    StepResult step(const std::vector<int>& bits, const std::vector<double>& fractions) override;

    /// Steps with a full raw action (used by the baseline policies).
    StepResult step_action(const env::Action& raw);

    const env::ValidatedSystem& system() const { return sys_; }
    const env::EnvState& state() const { return state_; }
    const env::RequestMatrix& requests() const { return requests_; }
    policy::Observation observation() const { return policy::observe(state_, requests_); }
    /// Effective action of the last step.
    const env::Action& last_action() const { return last_action_; }
    Vec encode() const;

private:
    env::ValidatedSystem sys_;
    env::DemandModel demand_;
    Shape shape_;
    std::size_t horizon_;
    std::uint64_t seed_ = 0;
    env::EnvState state_;
    env::RequestMatrix requests_;
    env::Action last_action_;
    std::vector<double> table_acc_;  // per (agent, model); 0 when the pair has no table row
};

}  // namespace edgeserve::learn
