#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "common/rng.hpp"
#include "learn/tape.hpp"
#include "learn/ttt.hpp"

namespace edgeserve::learn {

struct NetConfig {
    std::size_t obs_dim = 0;
    std::size_t bits = 0;       // Bernoulli cache decisions
    std::size_t fractions = 0;  // logit-normal offload fractions; 0 or == bits
    std::size_t hidden = 128;
    std::size_t ttt_hidden = 32;
    std::size_t heads = 4;
    std::size_t ttt_minibatch = 4;
    double eta_inner = 0.01;
    double keep_prob = 0.75;
    bool use_ttt = true;
    double init_log_std = -0.5;
};

/// Parameter slots, in checkpoint order.
enum Param : std::size_t {
    kW1, kB1, kW2, kB2,   // encoder trunk
    kTtt,                 // TTT initial weight W0 (d x heads*d)
    kWa, kBa,             // actor hidden
    kWl, kBl,             // cache-bit logits
    kWm, kBm,             // offload-fraction means (pre-sigmoid)
    kLogStd,              // offload-fraction log std, 1 x fractions
    kWc1, kBc1, kWc2, kBc2,  // critic
    kParamCount
};

std::string_view param_name(std::size_t p);

struct Decision {
    std::vector<int> bits;
    std::vector<double> fractions;  // sigmoid(u)
    Vec u;                          // pre-sigmoid sample
    double logprob = 0.0;           // joint log density of (bits, fractions)
    double value = 0.0;
    Vec delta;                      // TTT state W_t - W0 used for this step
};

struct HeadVars {
    Var logits;
    Var mu;
    Var log_std;
    Var value;
};

/// Actor-critic with a TTT feature layer:
/// obs -> tanh(128) -> tanh(32) = x -> z = x + W_t x (TTT) ->
/// actor tanh(128) -> {cache logits, fraction means}; critic tanh(128) -> V.
/// With use_ttt = false the TTT layer is skipped (z = x), which is the plain
/// PPO network.
class ActorCritic {
public:
    ActorCritic() = default;
    ActorCritic(const NetConfig& cfg, std::uint64_t seed);

    const NetConfig& config() const { return cfg_; }
    std::vector<Mat>& params() { return params_; }
    const std::vector<Mat>& params() const { return params_; }
    const std::vector<Vec>& masks() const { return masks_; }
    void set_masks(std::vector<Vec> masks);
    std::size_t delta_size() const { return cfg_.heads * head_dim() * head_dim(); }
    std::size_t head_dim() const { return cfg_.ttt_hidden / cfg_.heads; }

    /// Episode start: TTT state back to W0.
    void reset_state();
    /// Disables or restores inner-loop adaptation (eta = 0 freezes W at W0).
    void set_inner_rate(double eta);

    /// One environment step: advances the TTT state on this observation and
    /// returns a sampled (or greedy) action with its log density and value.
    Decision act(const Vec& obs, Rng& rng, bool greedy);

    /// Log density of a given action under the current parameters, without
    /// touching the recurrent state (uses the supplied delta).
    double logprob_of(const Vec& obs, const Vec& delta, const std::vector<int>& bits, const Vec& u) const;

    /// Batched forward on a tape. `leaves` must come from bind().
    HeadVars forward(Tape& tape, const std::vector<Var>& leaves, const Mat& obs, const Mat& delta) const;
    std::vector<Var> bind(Tape& tape) const;

    /// log pi(bits, u) per row, including the sigmoid change of variables.
    Var joint_logprob(const HeadVars& h, const Mat& bits, const Mat& u) const;

    std::uint64_t fingerprint() const;

private:
    Mat trunk(const Mat& obs) const;

    NetConfig cfg_;
    std::vector<Mat> params_;
    std::vector<Vec> masks_;
    TttLayer layer_;
};

}  // namespace edgeserve::learn
