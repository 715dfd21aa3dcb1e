#include "learn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "common/error.hpp"

namespace edgeserve::learn {

Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values, const std::vector<bool>& done,
               double bootstrap, double gamma, double lambda) {
    if (rewards.size() != values.size() || rewards.size() != done.size()) throw DomainError("gae: length mismatch");
    const std::size_t n = rewards.size();
    Advantages out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double running = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const double next_value = done[t] ? 0.0 : (t + 1 < n ? values[t + 1] : bootstrap);
        const double carry = done[t] ? 0.0 : running;
        const double delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * carry;
        out.advantages[t] = running;
        out.returns[t] = running + values[t];
    }
    return out;
}

Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values, double bootstrap, double gamma,
               double lambda) {
    return gae(rewards, values, std::vector<bool>(rewards.size(), false), bootstrap, gamma, lambda);
}

void RolloutBuffer::clear() {
    steps.clear();
    advantages.clear();
    returns.clear();
}

void RolloutBuffer::finish(double gamma, double lambda, double bootstrap) {
    std::vector<double> r, v;
    std::vector<bool> d;
    for (const auto& s : steps) {
        r.push_back(s.reward);
        v.push_back(s.value);
        d.push_back(s.done);
    }
    auto a = gae(r, v, d, bootstrap, gamma, lambda);
    advantages = std::move(a.advantages);
    returns = std::move(a.returns);
}

std::vector<double> normalize(std::vector<double> v) {
    if (v.empty()) return v;
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    for (double& x : v) x = (x - mean) / (sd + 1e-8);
    return v;
}

Var clipped_surrogate(Var ratio, const Mat& advantages, double clip) {
    Tape& t = *ratio.tape;
    Var adv = t.constant(advantages);
    Var unclipped = mul(ratio, adv);
    Var clipped = mul(clamp(ratio, 1.0 - clip, 1.0 + clip), adv);
    return scale(mean(minimum(unclipped, clipped)), -1.0);
}

MinibatchLoss ppo_loss(const ActorCritic& net, Tape& tape, const std::vector<Var>& leaves,
                       const RolloutBuffer& buffer, const std::vector<std::size_t>& rows,
                       const std::vector<double>& advantages, const PpoConfig& cfg) {
    const auto& nc = net.config();
    const long b = static_cast<long>(rows.size());
    Mat obs(b, static_cast<long>(nc.obs_dim)), delta(b, static_cast<long>(net.delta_size())),
        bits(b, static_cast<long>(nc.bits)), u(b, static_cast<long>(nc.fractions));
    Mat old_lp(b, 1), adv(b, 1), ret(b, 1);
    for (long r = 0; r < b; ++r) {
        const auto& s = buffer.steps[rows[static_cast<std::size_t>(r)]];
        obs.row(r) = s.obs.transpose();
        delta.row(r) = s.delta.transpose();
        for (std::size_t k = 0; k < nc.bits; ++k) bits(r, static_cast<long>(k)) = s.bits[k];
        if (nc.fractions) u.row(r) = s.u.transpose();
        old_lp(r, 0) = s.logprob;
        adv(r, 0) = advantages[rows[static_cast<std::size_t>(r)]];
        ret(r, 0) = buffer.returns[rows[static_cast<std::size_t>(r)]];
    }

    const HeadVars h = net.forward(tape, leaves, obs, delta);
    Var lp = net.joint_logprob(h, bits, u);
    Var ratio = exp(sub(lp, tape.constant(old_lp)));
    MinibatchLoss out{};
    out.ratio = ratio.value();
    out.policy = clipped_surrogate(ratio, adv, cfg.clip);
    out.value = mean(square(sub(h.value, tape.constant(ret))));
    out.total = add(out.policy, scale(out.value, cfg.value_coef));
    Var ent = mean(row_sum(bernoulli_entropy(h.logits)));
    if (nc.fractions) ent = add(ent, sum(h.log_std));  // Gaussian entropy up to a constant
    out.entropy = ent;
    if (cfg.entropy_coef != 0.0) out.total = sub(out.total, scale(ent, cfg.entropy_coef));
    return out;
}

PpoStats ppo_update(ActorCritic& net, Adam& opt, const RolloutBuffer& buffer, const PpoConfig& cfg, Rng& rng) {
    const std::size_t n = buffer.steps.size();
    if (n == 0) throw DomainError("ppo_update: empty buffer");
    if (buffer.advantages.size() != n) throw DomainError("ppo_update: advantages not computed");
    const std::size_t mb = std::max<std::size_t>(1, cfg.minibatch);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    PpoStats stats;
    double clipped = 0.0, kl = 0.0, samples = 0.0;
    for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0, batch = 0; start < n; start += mb, ++batch) {
            std::vector<std::size_t> rows(order.begin() + static_cast<long>(start),
                                          order.begin() + static_cast<long>(std::min(n, start + mb)));
            std::vector<double> adv(n, 0.0);
            {
                std::vector<double> a;
                for (auto r : rows) a.push_back(buffer.advantages[r]);
                if (cfg.normalize_advantages && a.size() > 1) a = normalize(std::move(a));
                for (std::size_t k = 0; k < rows.size(); ++k) adv[rows[k]] = a[k];
            }
            Tape tape;
            const auto leaves = net.bind(tape);
            MinibatchLoss loss = ppo_loss(net, tape, leaves, buffer, rows, adv, cfg);
            const double total = loss.total.value()(0, 0);
            if (!std::isfinite(total))
                throw NumericError("ppo_update: non-finite loss in pass " + std::to_string(pass) + ", minibatch " +
                                   std::to_string(batch));
            tape.backward(loss.total);
            std::vector<Mat> grads;
            for (const auto& l : leaves) grads.push_back(l.grad());
            const double gn = global_norm(grads);
            if (!std::isfinite(gn))
                throw NumericError("ppo_update: non-finite gradient in pass " + std::to_string(pass) +
                                   ", minibatch " + std::to_string(batch));
            stats.grad_norm = opt.step(net.params(), grads);

            stats.policy_loss += loss.policy.value()(0, 0);
            stats.value_loss += loss.value.value()(0, 0);
            stats.entropy += loss.entropy.value()(0, 0);
            ++stats.minibatches;
            for (long r = 0; r < loss.ratio.rows(); ++r) {
                const double rho = loss.ratio(r, 0);
                clipped += std::abs(rho - 1.0) > cfg.clip ? 1.0 : 0.0;
                kl += rho - 1.0 - std::log(rho);
                samples += 1.0;
            }
        }
    }
    const double m = static_cast<double>(stats.minibatches);
    stats.policy_loss /= m;
    stats.value_loss /= m;
    stats.entropy /= m;
    stats.clip_fraction = clipped / samples;
    stats.approx_kl = kl / samples;
    net.reset_state();
    return stats;
}

}  // namespace edgeserve::learn
