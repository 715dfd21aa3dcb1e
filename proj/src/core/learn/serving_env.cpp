#include "learn/serving_env.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "cot/tables.hpp"

namespace edgeserve::learn {

ServingEnv::ServingEnv(env::ValidatedSystem sys, env::DemandModel demand, std::size_t horizon)
    : sys_(std::move(sys)), demand_(std::move(demand)), shape_(sys_.shape()), horizon_(horizon) {
    table_acc_.assign(shape_.per_server(), 0.0);
    for (std::size_t i = 0; i < shape_.agents; ++i)
        for (std::size_t m = 0; m < shape_.models; ++m) {
            const auto& model = sys_.model(m).name;
            const auto& dataset = sys_.agent(i).dataset;
            if (!sys_.params(i, m).uses || !cot::is_table_model(model) || !cot::is_dataset(dataset)) continue;
            const double paths = std::min(20, sys_.params(i, m).paths);
            table_acc_[i * shape_.models + m] = cot::accuracy_lookup(model, dataset, paths, cot::PromptMode::ScCoT);
        }
    reset(0);
}

Vec ServingEnv::encode() const {
    const long c = static_cast<long>(shape_.size());
    Vec obs(3 * c);
    for (std::size_t n = 0; n < shape_.servers; ++n) {
        const double scale = std::max(demand_.volume(n), 1.0);
        for (std::size_t i = 0; i < shape_.agents; ++i)
            for (std::size_t m = 0; m < shape_.models; ++m) {
                const long k = static_cast<long>(shape_.index(n, i, m));
                obs(k) = state_.cache[static_cast<std::size_t>(k)];
                obs(c + k) = requests_[static_cast<std::size_t>(k)] / scale;
                obs(2 * c + k) = state_.aot[static_cast<std::size_t>(k)] / sys_.model(m).context_window;
            }
    }
    return obs;
}

Vec ServingEnv::reset(std::uint64_t episode_seed) {
    seed_ = episode_seed;
    state_ = env::EnvState::initial(shape_);
    requests_ = env::generate_requests(sys_, demand_, seed_, 0);
    last_action_ = env::Action::all_offload(shape_);
    return encode();
}

StepResult ServingEnv::step(const std::vector<int>& bits, const std::vector<double>& fractions) {
    if (bits.size() != shape_.size() || fractions.size() != shape_.size())
        throw DomainError("serving env: action has the wrong size");
    env::Action raw{Grid<int>(shape_, 0), Grid<double>(shape_, 1.0), false};
    for (std::size_t k = 0; k < shape_.size(); ++k) {
        raw.cache[k] = bits[k] ? 1 : 0;
        raw.offload[k] = fractions[k];
    }
    return step_action(raw);
}

StepResult ServingEnv::step_action(const env::Action& raw) {
    if (state_.slot >= horizon_) throw DomainError("serving env: step past the horizon");
    const env::Action action = env::repair_action(sys_, raw, requests_);
    StepResult res;
    res.violations = env::check_feasibility(sys_, action, requests_).violations();

    auto [next, outcome] = env::step(sys_, state_, action, requests_);
    res.cost = cost::slot_cost(sys_, state_.cache, outcome, next, requests_);
    res.reward = cost::reward(res.cost);
    res.evictions = outcome.evicted.size();

    for (std::size_t n = 0; n < shape_.servers; ++n)
        for (std::size_t i = 0; i < shape_.agents; ++i)
            for (std::size_t m = 0; m < shape_.models; ++m) {
                const std::size_t k = shape_.index(n, i, m);
                const double r = requests_[k];
                if (r <= 0) continue;
                res.requests += r;
                res.table_accuracy += r * table_acc_[i * shape_.models + m];
                const auto& eff = outcome.effective;
                if (eff.cache[k]) {
                    const auto& p = sys_.params(i, m);
                    res.edge_requests += r * (1.0 - eff.offload[k]);
                    res.edge_accuracy += r * (1.0 - eff.offload[k]) *
                                         cost::accuracy_value(p.zero_shot_accuracy, p.reasoning_gain, next.aot[k]);
                }
            }

    last_action_ = outcome.effective;
    state_ = std::move(next);
    res.done = state_.slot >= horizon_;
    requests_ = env::generate_requests(sys_, demand_, seed_, state_.slot);
    res.obs = encode();
    return res;
}

}  // namespace edgeserve::learn
