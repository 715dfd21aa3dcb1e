#include "learn/network.hpp"

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace edgeserve::learn {
namespace {

constexpr std::array<std::string_view, kParamCount> kNames = {
    "encoder.w1", "encoder.b1", "encoder.w2", "encoder.b2", "ttt.w0",       "actor.w",
    "actor.b",    "cache.w",    "cache.b",    "offload.w",  "offload.b",    "offload.log_std",
    "critic.w1",  "critic.b1",  "critic.w2",  "critic.b2"};

Mat xavier(long rows, long cols, double gain, Rng& rng) {
    const double limit = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = u(rng);
    return m;
}

double softplus_d(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid_d(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

std::string_view param_name(std::size_t p) { return kNames.at(p); }

ActorCritic::ActorCritic(const NetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg.obs_dim == 0) throw NumericError("network: obs_dim must be > 0");
    if (cfg.bits == 0) throw NumericError("network: at least one cache bit is required");
    if (cfg.fractions != 0 && cfg.fractions != cfg.bits)
        throw NumericError("network: offload fractions must pair with cache bits");
    if (cfg.heads == 0 || cfg.ttt_hidden % cfg.heads != 0)
        throw NumericError("network: ttt hidden size must split evenly over heads");

    Rng rng = make_rng(seed, {0x6e6574});
    const long in = static_cast<long>(cfg.obs_dim), h = static_cast<long>(cfg.hidden),
               d = static_cast<long>(cfg.ttt_hidden), nb = static_cast<long>(cfg.bits),
               nf = static_cast<long>(cfg.fractions);
    params_.resize(kParamCount);
    params_[kW1] = xavier(in, h, 1.0, rng);
    params_[kB1] = Mat::Zero(1, h);
    params_[kW2] = xavier(h, d, 1.0, rng);
    params_[kB2] = Mat::Zero(1, d);
    params_[kTtt] = Mat::Zero(static_cast<long>(head_dim()), d);
    params_[kWa] = xavier(d, h, 1.0, rng);
    params_[kBa] = Mat::Zero(1, h);
    params_[kWl] = xavier(h, nb, 0.01, rng);
    params_[kBl] = Mat::Zero(1, nb);
    params_[kWm] = xavier(h, nf, 0.01, rng);
    params_[kBm] = Mat::Zero(1, nf);
    params_[kLogStd] = Mat::Constant(1, nf, cfg.init_log_std);
    params_[kWc1] = xavier(d, h, 1.0, rng);
    params_[kBc1] = Mat::Zero(1, h);
    params_[kWc2] = xavier(h, 1, 1.0, rng);
    params_[kBc2] = Mat::Zero(1, 1);

    std::vector<Vec> masks;
    for (std::size_t k = 0; k < cfg.heads; ++k)
        masks.push_back(corruption_mask(head_dim(), cfg.keep_prob, derive_seed(seed, {0x6d61736b, k})));
    set_masks(std::move(masks));
}

void ActorCritic::set_masks(std::vector<Vec> masks) {
    masks_ = std::move(masks);
    layer_ = TttLayer(params_[kTtt], masks_, cfg_.use_ttt ? cfg_.eta_inner : 0.0, cfg_.ttt_minibatch);
}

void ActorCritic::reset_state() { layer_.set_w0(params_[kTtt]); }

void ActorCritic::set_inner_rate(double eta) { layer_.set_eta(eta); }

Mat ActorCritic::trunk(const Mat& obs) const {
    Mat h1 = ((obs * params_[kW1]).rowwise() + params_[kB1].row(0)).array().tanh().matrix();
    return ((h1 * params_[kW2]).rowwise() + params_[kB2].row(0)).array().tanh().matrix();
}

std::vector<Var> ActorCritic::bind(Tape& tape) const {
    std::vector<Var> leaves;
    leaves.reserve(params_.size());
    for (const auto& p : params_) leaves.push_back(tape.leaf(p));
    return leaves;
}

HeadVars ActorCritic::forward(Tape& tape, const std::vector<Var>& P, const Mat& obs, const Mat& delta) const {
    Var X = tape.constant(obs);
    Var h1 = tanh(add_bias(matmul(X, P[kW1]), P[kB1]));
    Var x = tanh(add_bias(matmul(h1, P[kW2]), P[kB2]));
    Var z = cfg_.use_ttt ? add(x, ttt_apply(x, P[kTtt], delta, cfg_.heads)) : x;
    Var ha = tanh(add_bias(matmul(z, P[kWa]), P[kBa]));
    Var hc = tanh(add_bias(matmul(z, P[kWc1]), P[kBc1]));
    return HeadVars{add_bias(matmul(ha, P[kWl]), P[kBl]), add_bias(matmul(ha, P[kWm]), P[kBm]), P[kLogStd],
                    add_bias(matmul(hc, P[kWc2]), P[kBc2])};
}

Var ActorCritic::joint_logprob(const HeadVars& h, const Mat& bits, const Mat& u) const {
    Tape& tape = *h.logits.tape;
    Var lp = row_sum(bernoulli_logprob(h.logits, bits));
    if (cfg_.fractions == 0) return lp;
    // A fraction only matters where its cell is cached, so its density is
    // counted on those cells only. The Jacobian of b = sigmoid(u) is a
    // constant given u.
    Mat jac = u.unaryExpr(&softplus_d) + (-u).unaryExpr(&softplus_d);
    Var dens = add(normal_logprob(u, h.mu, h.log_std), tape.constant(jac));
    return add(lp, row_sum(mul(dens, tape.constant(bits))));
}

Decision ActorCritic::act(const Vec& obs, Rng& rng, bool greedy) {
    if (obs.size() != static_cast<long>(cfg_.obs_dim)) throw NumericError("act: observation has the wrong size");
    Mat row = obs.transpose();
    Decision d;
    if (cfg_.use_ttt) {
        layer_.advance(trunk(row).row(0).transpose());
        d.delta = layer_.delta();
    } else {
        d.delta = Vec::Zero(static_cast<long>(delta_size()));
    }

    Tape tape;
    std::vector<Var> P;
    for (const auto& p : params_) P.push_back(tape.constant(p));
    const HeadVars h = forward(tape, P, row, d.delta.transpose());

    const Mat& logits = h.logits.value();
    d.bits.resize(cfg_.bits);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t k = 0; k < cfg_.bits; ++k) {
        const double l = logits(0, static_cast<long>(k));
        d.bits[k] = greedy ? (l > 0.0 ? 1 : 0) : (unif(rng) < sigmoid_d(l) ? 1 : 0);
    }
    d.u = Vec::Zero(static_cast<long>(cfg_.fractions));
    d.fractions.resize(cfg_.fractions);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < cfg_.fractions; ++k) {
        const long c = static_cast<long>(k);
        const double mu = h.mu.value()(0, c);
        const double sd = std::exp(h.log_std.value()(0, c));
        d.u(c) = greedy ? mu : mu + sd * normal(rng);
        d.fractions[k] = sigmoid_d(d.u(c));
    }

    Mat bits(1, static_cast<long>(cfg_.bits));
    for (std::size_t k = 0; k < cfg_.bits; ++k) bits(0, static_cast<long>(k)) = d.bits[k];
    d.logprob = joint_logprob(h, bits, d.u.transpose()).value()(0, 0);
    d.value = h.value.value()(0, 0);
    if (!std::isfinite(d.logprob) || !std::isfinite(d.value)) throw NumericError("act: non-finite policy output");
    return d;
}

double ActorCritic::logprob_of(const Vec& obs, const Vec& delta, const std::vector<int>& bits, const Vec& u) const {
    Tape tape;
    std::vector<Var> P;
    for (const auto& p : params_) P.push_back(tape.constant(p));
    const HeadVars h = forward(tape, P, obs.transpose(), delta.transpose());
    Mat b(1, static_cast<long>(bits.size()));
    for (std::size_t k = 0; k < bits.size(); ++k) b(0, static_cast<long>(k)) = bits[k];
    return joint_logprob(h, b, u.transpose()).value()(0, 0);
}

std::uint64_t ActorCritic::fingerprint() const {
    Fnv1a h;
    for (const auto& p : params_)
        for (long k = 0; k < p.size(); ++k) h.update(p.data()[k]);
    for (const auto& m : masks_)
        for (long k = 0; k < m.size(); ++k) h.update(m(k));
    return h.digest();
}

}  // namespace edgeserve::learn
