#include "learn/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "common/rng.hpp"
#include "learn/network.hpp"
#include "learn/ppo.hpp"

namespace edgeserve::learn {
namespace {

using OpFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct Case {
    std::string name;
    std::vector<std::pair<long, long>> shapes;
    // Builds the op for one probe point; may draw constants from the rng.
    std::function<OpFn(Rng&)> make;
    // Rejects inputs too close to a kink of a piecewise op.
    std::function<bool(const std::vector<Mat>&)> admissible;
    double input_scale = 1.0;
};

Mat random_mat(long r, long c, double scale, Rng& rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Mat m(r, c);
    for (long k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
    return m;
}

bool away_from(const Mat& m, double kink, double margin) {
    return ((m.array() - kink).abs() > margin).all();
}

double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-4}); }

double probe(const Case& c, std::size_t points, Rng& rng) {
    double worst = 0.0;
    for (std::size_t pt = 0; pt < points; ++pt) {
        std::vector<Mat> inputs;
        for (int attempt = 0;; ++attempt) {
            inputs.clear();
            for (auto [r, k] : c.shapes) inputs.push_back(random_mat(r, k, c.input_scale, rng));
            if (!c.admissible || c.admissible(inputs) || attempt > 1000) break;
        }
        const OpFn f = c.make(rng);

        Mat weights;
        std::vector<Mat> analytic;
        {
            Tape t;
            std::vector<Var> v;
            for (const auto& m : inputs) v.push_back(t.leaf(m));
            Var out = f(t, v);
            weights = random_mat(out.value().rows(), out.value().cols(), 1.0, rng);
            Var root = sum(mul(out, t.constant(weights)));
            t.backward(root);
            for (const auto& x : v) analytic.push_back(x.grad());
        }
        auto eval = [&](const std::vector<Mat>& in) {
            Tape t;
            std::vector<Var> v;
            for (const auto& m : in) v.push_back(t.constant(m));
            return f(t, v).value().cwiseProduct(weights).sum();
        };
        for (std::size_t k = 0; k < inputs.size(); ++k)
            for (long e = 0; e < inputs[k].size(); ++e) {
                std::vector<Mat> plus = inputs, minus = inputs;
                const double h = 1e-6 * std::max(1.0, std::abs(inputs[k].data()[e]));
                plus[k].data()[e] += h;
                minus[k].data()[e] -= h;
                const double numeric = (eval(plus) - eval(minus)) / (2.0 * h);
                worst = std::max(worst, rel_error(analytic[k].data()[e], numeric));
            }
    }
    return worst;
}

OpFn fixed(OpFn f) { return f; }

std::vector<Case> cases() {
    std::vector<Case> out;
    auto simple = [&](std::string name, std::vector<std::pair<long, long>> shapes, OpFn f) {
        out.push_back(Case{std::move(name), std::move(shapes), [f](Rng&) { return fixed(f); }, nullptr, 1.0});
    };
    simple("matmul", {{3, 4}, {4, 2}}, [](Tape&, const std::vector<Var>& v) { return matmul(v[0], v[1]); });
    simple("add_bias", {{3, 4}, {1, 4}}, [](Tape&, const std::vector<Var>& v) { return add_bias(v[0], v[1]); });
    simple("add", {{3, 4}, {3, 4}}, [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); });
    simple("sub", {{3, 4}, {3, 4}}, [](Tape&, const std::vector<Var>& v) { return sub(v[0], v[1]); });
    simple("mul", {{3, 4}, {3, 4}}, [](Tape&, const std::vector<Var>& v) { return mul(v[0], v[1]); });
    simple("scale", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return scale(v[0], -2.5); });
    simple("tanh", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return tanh(v[0]); });
    simple("sigmoid", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return sigmoid(v[0]); });
    simple("softplus", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return softplus(v[0]); });
    simple("exp", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return exp(v[0]); });
    simple("square", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return square(v[0]); });
    simple("sum", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return sum(v[0]); });
    simple("mean", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return mean(v[0]); });
    simple("row_sum", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return row_sum(v[0]); });
    simple("bernoulli_entropy", {{3, 4}}, [](Tape&, const std::vector<Var>& v) { return bernoulli_entropy(v[0]); });

    out.push_back(Case{"clamp", {{3, 4}},
                       [](Rng&) { return OpFn([](Tape&, const std::vector<Var>& v) { return clamp(v[0], -0.4, 0.3); }); },
                       [](const std::vector<Mat>& in) { return away_from(in[0], -0.4, 1e-3) && away_from(in[0], 0.3, 1e-3); },
                       1.0});
    out.push_back(Case{"minimum", {{3, 4}, {3, 4}},
                       [](Rng&) { return OpFn([](Tape&, const std::vector<Var>& v) { return minimum(v[0], v[1]); }); },
                       [](const std::vector<Mat>& in) { return ((in[0] - in[1]).array().abs() > 1e-3).all(); }, 1.0});
    out.push_back(Case{"bernoulli_logprob", {{3, 4}},
                       [](Rng& rng) {
                           Mat x = random_mat(3, 4, 1.0, rng).unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; });
                           return OpFn([x](Tape&, const std::vector<Var>& v) { return bernoulli_logprob(v[0], x); });
                       },
                       nullptr, 3.0});
    out.push_back(Case{"normal_logprob", {{3, 4}, {1, 4}},
                       [](Rng& rng) {
                           Mat u = random_mat(3, 4, 2.0, rng);
                           return OpFn([u](Tape&, const std::vector<Var>& v) { return normal_logprob(u, v[0], v[1]); });
                       },
                       nullptr, 1.0});
    out.push_back(Case{"ttt_apply", {{3, 8}, {4, 8}},
                       [](Rng& rng) {
                           Mat dw = random_mat(3, 2 * 16, 0.3, rng);
                           return OpFn([dw](Tape&, const std::vector<Var>& v) { return ttt_apply(v[0], v[1], dw, 2); });
                       },
                       nullptr, 1.0});
    return out;
}

// PPO loss of a tiny actor-critic, differentiated with respect to every parameter.
Case network_case() {
    NetConfig nc;
    nc.obs_dim = 3;
    nc.bits = 2;
    nc.fractions = 2;
    nc.hidden = 5;
    nc.ttt_hidden = 4;
    nc.heads = 2;
    std::vector<std::pair<long, long>> shapes;
    const ActorCritic proto(nc, 7);
    for (const auto& p : proto.params()) shapes.emplace_back(p.rows(), p.cols());

    Case c;
    c.name = "ppo_loss";
    c.shapes = shapes;
    c.input_scale = 0.5;
    c.make = [nc, proto](Rng& rng) {
        auto net = std::make_shared<ActorCritic>(proto);
        auto buffer = std::make_shared<RolloutBuffer>();
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::bernoulli_distribution coin(0.5);
        for (int r = 0; r < 6; ++r) {
            Transition s;
            s.obs = random_mat(3, 1, 1.0, rng);
            s.bits = {coin(rng) ? 1 : 0, coin(rng) ? 1 : 0};
            s.u = random_mat(2, 1, 1.5, rng);
            s.delta = random_mat(static_cast<long>(net->delta_size()), 1, 0.2, rng);
            s.logprob = u(rng);  // replaced below once parameters are known
            buffer->steps.push_back(s);
            buffer->returns.push_back(u(rng));
            buffer->advantages.push_back(u(rng));
        }
        std::vector<double> offsets;
        for (int r = 0; r < 6; ++r) offsets.push_back(0.3 * u(rng));
        auto primed = std::make_shared<bool>(false);
        return OpFn([net, buffer, offsets, primed](Tape& tape, const std::vector<Var>& v) {
            if (!*primed) {
                // Old log-probabilities sit a random distance from the current
                // ones so both sides of the clip are exercised.
                for (std::size_t p = 0; p < v.size(); ++p) net->params()[p] = v[p].value();
                for (std::size_t r = 0; r < buffer->steps.size(); ++r) {
                    auto& s = buffer->steps[r];
                    s.logprob = net->logprob_of(s.obs, s.delta, s.bits, s.u) + offsets[r];
                }
                *primed = true;
            }
            PpoConfig cfg;
            cfg.entropy_coef = 0.01;
            std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
            return ppo_loss(*net, tape, v, *buffer, rows, buffer->advantages, cfg).total;
        });
    };
    return c;
}

}  // namespace

std::vector<GradcheckResult> gradcheck_all(std::uint64_t seed, std::size_t points) {
    std::vector<GradcheckResult> out;
    auto all = cases();
    all.push_back(network_case());
    for (std::size_t k = 0; k < all.size(); ++k) {
        Rng rng = make_rng(seed, {0x67726164, k});
        GradcheckResult r;
        r.op = all[k].name;
        r.points = points;
        r.max_rel_error = probe(all[k], points, rng);
        r.passed = r.max_rel_error <= kGradcheckTolerance;
        out.push_back(r);
    }
    return out;
}

}  // namespace edgeserve::learn
