#include "learn/trainer.hpp"

#include "common/error.hpp"

namespace edgeserve::learn {

std::uint64_t train_episode_seed(std::uint64_t seed, std::uint64_t episode) {
    return derive_seed(seed, {0x747261696e, episode});
}

std::uint64_t eval_episode_seed(std::uint64_t seed, std::uint64_t episode) {
    return derive_seed(seed, {0x6576616c, episode});
}

TrainResult train(Env& env, const TrainConfig& cfg, const std::function<void(const EpochStats&)>& on_epoch) {
    if (!cfg.adapt && cfg.net.use_ttt)
        throw Error(ErrorKind::Config,
                    "test-time adaptation cannot be disabled for training: the inner loop is part of the forward pass");
    if (cfg.steps_per_epoch == 0) throw Error(ErrorKind::Config, "steps_per_epoch must be > 0");
    if (env.horizon() == 0) throw DomainError("train: empty horizon");

    NetConfig nc = cfg.net;
    nc.obs_dim = env.obs_dim();
    nc.bits = env.bits();
    nc.fractions = env.fractions();
    TrainResult result{ActorCritic(nc, cfg.seed), {}};
    ActorCritic& net = result.net;
    Adam opt(cfg.adam, net.params());
    Rng act_rng = make_rng(cfg.seed, {0x616374});
    Rng ppo_rng = make_rng(cfg.seed, {0x70706f});

    std::uint64_t episode = 0;
    RolloutBuffer buffer;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        buffer.clear();
        EpochStats st;
        st.epoch = epoch;
        cost::CostBreakdown sum;
        double reward_sum = 0.0;
        while (buffer.steps.size() < cfg.steps_per_epoch) {
            Vec obs = env.reset(train_episode_seed(cfg.seed, episode++));
            net.reset_state();
            for (bool done = false; !done;) {
                Decision d = net.act(obs, act_rng, false);
                StepResult r = env.step(d.bits, d.fractions);
                buffer.steps.push_back(Transition{obs, d.bits, d.u, d.delta, d.logprob, d.value,
                                                  r.reward * cfg.reward_scale, r.done});
                sum += r.cost;
                reward_sum += r.reward;
                obs = std::move(r.obs);
                done = r.done;
            }
            ++st.episodes;
        }
        buffer.finish(cfg.gamma, cfg.gae_lambda);
        if (cfg.anneal_lr)
            opt.set_lr(cfg.adam.lr * (1.0 - static_cast<double>(epoch) / static_cast<double>(cfg.epochs)));
        st.ppo = ppo_update(net, opt, buffer, cfg.ppo, ppo_rng);

        st.steps = buffer.steps.size();
        const double n = static_cast<double>(st.steps);
        st.parts = cost::CostBreakdown{sum.switching / n, sum.transmission / n, sum.computation / n,
                                       sum.accuracy / n,  sum.cloud / n,        sum.total / n};
        st.mean_cost = st.parts.total;
        st.mean_reward = reward_sum / n;
        result.curve.push_back(st);
        if (on_epoch) on_epoch(st);
    }
    net.reset_state();
    return result;
}

void MetricsAccumulator::add(const StepResult& r) {
    sum_ += r.cost;
    episode_cost_ += r.cost.total;
    ++episode_slots_;
    ++m_.slots;
    m_.evictions += r.evictions;
    m_.violations += r.violations;
    edge_acc_ += r.edge_accuracy;
    edge_req_ += r.edge_requests;
    table_acc_ += r.table_accuracy;
    req_ += r.requests;
}

void MetricsAccumulator::end_episode() {
    if (episode_slots_ == 0) return;
    m_.episode_costs.push_back(episode_cost_ / static_cast<double>(episode_slots_));
    ++m_.episodes;
    episode_cost_ = 0.0;
    episode_slots_ = 0;
}

EvalMetrics MetricsAccumulator::finish() const {
    EvalMetrics out = m_;
    if (out.slots == 0) return out;
    const double n = static_cast<double>(out.slots);
    out.parts = cost::CostBreakdown{sum_.switching / n, sum_.transmission / n, sum_.computation / n,
                                    sum_.accuracy / n,  sum_.cloud / n,        sum_.total / n};
    out.mean_cost = out.parts.total;
    out.edge_accuracy = edge_req_ > 0 ? edge_acc_ / edge_req_ : 0.0;
    out.table_accuracy = req_ > 0 ? table_acc_ / req_ : 0.0;
    return out;
}

EvalMetrics evaluate(const ActorCritic& trained, Env& env, const EvalConfig& cfg) {
    if (env.horizon() == 0 || cfg.episodes == 0) throw DomainError("evaluate: empty horizon");
    ActorCritic net = trained;
    net.set_inner_rate(cfg.adapt && net.config().use_ttt ? net.config().eta_inner : 0.0);
    Rng rng = make_rng(cfg.seed, {0x65766163});
    MetricsAccumulator acc;
    for (std::size_t e = 0; e < cfg.episodes; ++e) {
        Vec obs = env.reset(eval_episode_seed(cfg.seed, e));
        net.reset_state();
        for (std::size_t slot = 0, done = 0; !done; ++slot) {
            Decision d = net.act(obs, rng, cfg.greedy);
            StepResult r = env.step(d.bits, d.fractions);
            acc.add(r);
            if (cfg.observer) cfg.observer(e, slot, r);
            obs = std::move(r.obs);
            done = r.done;
        }
        acc.end_episode();
    }
    return acc.finish();
}

}  // namespace edgeserve::learn
