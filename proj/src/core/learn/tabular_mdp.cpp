#include "learn/tabular_mdp.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "common/error.hpp"
#include "json.hpp"

namespace edgeserve::learn {

TabularMdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open MDP fixture '" + path + "'");
    TabularMdp mdp;
    try {
        nlohmann::json j;
        in >> j;
        mdp.states = j.at("states").get<std::size_t>();
        mdp.start = j.value("start", std::size_t{0});
        mdp.horizon = j.value("horizon", std::size_t{50});
        mdp.gamma = j.value("gamma", 0.95);
        mdp.transition = j.at("transition").get<decltype(mdp.transition)>();
        mdp.reward = j.at("reward").get<decltype(mdp.reward)>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("MDP fixture: ") + e.what());
    }
    if (mdp.transition.size() != mdp.states || mdp.reward.size() != mdp.states || mdp.start >= mdp.states)
        throw DomainError("MDP fixture: tables do not match the state count");
    for (std::size_t s = 0; s < mdp.states; ++s) {
        if (mdp.transition[s].size() != 2 || mdp.reward[s].size() != 2)
            throw DomainError("MDP fixture: exactly two actions per state");
        for (const auto& row : mdp.transition[s]) {
            double total = 0.0;
            for (double p : row) total += p;
            if (row.size() != mdp.states || std::abs(total - 1.0) > 1e-12)
                throw DomainError("MDP fixture: transition rows must sum to 1");
        }
    }
    return mdp;
}

ValueIteration value_iteration(const TabularMdp& mdp, double tol) {
    ValueIteration vi;
    vi.value.assign(mdp.states, 0.0);
    vi.q.assign(mdp.states, std::vector<double>(2, 0.0));
    for (int it = 0; it < 100000; ++it) {
        double change = 0.0;
        for (std::size_t s = 0; s < mdp.states; ++s)
            for (std::size_t a = 0; a < 2; ++a) {
                double q = mdp.reward[s][a];
                for (std::size_t s2 = 0; s2 < mdp.states; ++s2) q += mdp.gamma * mdp.transition[s][a][s2] * vi.value[s2];
                vi.q[s][a] = q;
            }
        for (std::size_t s = 0; s < mdp.states; ++s) {
            const double v = std::max(vi.q[s][0], vi.q[s][1]);
            change = std::max(change, std::abs(v - vi.value[s]));
            vi.value[s] = v;
        }
        if (change < tol) break;
    }
    vi.policy.clear();
    for (std::size_t s = 0; s < mdp.states; ++s) vi.policy.push_back(vi.q[s][1] > vi.q[s][0] ? 1 : 0);
    return vi;
}

TabularEnv::TabularEnv(TabularMdp mdp) : mdp_(std::move(mdp)) { reset(0); }

Vec TabularEnv::one_hot(std::size_t s) const {
    Vec v = Vec::Zero(static_cast<long>(mdp_.states));
    v(static_cast<long>(s)) = 1.0;
    return v;
}

Vec TabularEnv::reset(std::uint64_t episode_seed) {
    rng_ = Rng(episode_seed);
    state_ = mdp_.start;
    t_ = 0;
    return one_hot(state_);
}

StepResult TabularEnv::step(const std::vector<int>& bits, const std::vector<double>&) {
    if (bits.size() != 1) throw DomainError("tabular env: expects one action bit");
    const std::size_t a = bits[0] ? 1 : 0;
    StepResult res;
    res.reward = mdp_.reward[state_][a];
    res.cost.total = -res.reward;
    std::discrete_distribution<std::size_t> next(mdp_.transition[state_][a].begin(), mdp_.transition[state_][a].end());
    state_ = next(rng_);
    ++t_;
    res.done = t_ >= mdp_.horizon;
    res.obs = one_hot(state_);
    return res;
}

}  // namespace edgeserve::learn
