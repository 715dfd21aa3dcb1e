#pragma once

#include <cstdint>
#include <vector>

#include "common/rng.hpp"
#include "learn/adam.hpp"
#include "learn/network.hpp"

namespace edgeserve::learn {

struct Advantages {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Generalised advantage estimation over one segment. done[t] marks that the
/// episode ended after step t, which cuts both the bootstrap and the trace.
/// `bootstrap` is the value of the state after the last step. Throws
/// DomainError("length mismatch") when the inputs disagree in length.
Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values, const std::vector<bool>& done,
               double bootstrap, double gamma, double lambda);
Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values, double bootstrap, double gamma,
               double lambda);

struct Transition {
    Vec obs;
    std::vector<int> bits;
    Vec u;
    Vec delta;  // TTT state used when acting
    double logprob = 0.0;
    double value = 0.0;
    double reward = 0.0;
    bool done = false;
};

struct RolloutBuffer {
    std::vector<Transition> steps;
    std::vector<double> advantages;
    std::vector<double> returns;

    void clear();
    /// Fills advantages and returns. The buffer must end on an episode
    /// boundary or supply the value of the next state.
    void finish(double gamma, double lambda, double bootstrap = 0.0);
};

struct PpoConfig {
    double clip = 0.2;
    double value_coef = 0.25;
    double entropy_coef = 0.0;
    std::size_t minibatch = 128;
    std::size_t passes = 4;
    bool normalize_advantages = true;
};

struct PpoStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double approx_kl = 0.0;
    double grad_norm = 0.0;
    std::size_t minibatches = 0;
};

/// -mean(min(rho A, clip(rho, 1 - eps, 1 + eps) A)).
Var clipped_surrogate(Var ratio, const Mat& advantages, double clip);

/// Normalises to mean 0 and unit std (eps 1e-8).
std::vector<double> normalize(std::vector<double> v);

struct MinibatchLoss {
    Var total;
    Var policy;
    Var value;
    Var entropy;
    Mat ratio;
};

/// Builds the PPO loss for the given buffer rows on a fresh tape.
MinibatchLoss ppo_loss(const ActorCritic& net, Tape& tape, const std::vector<Var>& leaves,
                       const RolloutBuffer& buffer, const std::vector<std::size_t>& rows,
                       const std::vector<double>& advantages, const PpoConfig& cfg);

/// Several shuffled passes of minibatch updates over the buffer. A
/// non-finite loss or gradient aborts with NumericError naming the pass and
/// minibatch.
PpoStats ppo_update(ActorCritic& net, Adam& opt, const RolloutBuffer& buffer, const PpoConfig& cfg, Rng& rng);

}  // namespace edgeserve::learn
