#pragma once

#include <string>
#include <vector>

#include "common/rng.hpp"
#include "learn/env.hpp"

namespace edgeserve::learn {

/// A small finite MDP with binary actions, used as a known-answer check for
/// the learner. transition[s][a][s'] and reward[s][a].
struct TabularMdp {
    std::size_t states = 0;
    std::size_t start = 0;
    std::size_t horizon = 50;
    double gamma = 0.95;
    std::vector<std::vector<std::vector<double>>> transition;
    std::vector<std::vector<double>> reward;
};

TabularMdp load_mdp(const std::string& path);

struct ValueIteration {
    std::vector<double> value;
    std::vector<std::vector<double>> q;
    std::vector<int> policy;  // argmax action per state, ties to action 0
};

/// Discounted infinite-horizon value iteration to the given tolerance.
ValueIteration value_iteration(const TabularMdp& mdp, double tol = 1e-12);

/// Episodic wrapper: one-hot state observation, one bit selects the action.
class TabularEnv : public Env {
public:
    explicit TabularEnv(TabularMdp mdp);

    std::size_t obs_dim() const override { return mdp_.states; }
    std::size_t bits() const override { return 1; }
    std::size_t fractions() const override { return 0; }
    std::size_t horizon() const override { return mdp_.horizon; }

    Vec reset(std::uint64_t episode_seed) override;
    StepResult step(const std::vector<int>& bits, const std::vector<double>& fractions) override;

    Vec one_hot(std::size_t s) const;

private:
    TabularMdp mdp_;
    Rng rng_;
    std::size_t state_ = 0;
    std::size_t t_ = 0;
};

}  // namespace edgeserve::learn
