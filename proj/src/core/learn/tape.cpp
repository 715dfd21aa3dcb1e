#include "learn/tape.hpp"

#include <cmath>

#include "common/error.hpp"

namespace edgeserve::learn {

const Mat& Var::value() const { return tape->value(id); }
const Mat& Var::grad() const { return tape->grad(id); }

Var Tape::leaf(Mat value) {
    nodes_.push_back(Node{std::move(value), Mat(), true, nullptr});
    return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Mat value) {
    nodes_.push_back(Node{std::move(value), Mat(), false, nullptr});
    return Var{this, nodes_.size() - 1};
}

Var Tape::push(Mat value, std::initializer_list<Var> parents, Backward back) {
    bool rg = false;
    for (const auto& p : parents) rg |= nodes_[p.id].requires_grad;
    nodes_.push_back(Node{std::move(value), Mat(), rg, rg ? std::move(back) : nullptr});
    return Var{this, nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Mat& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
        n.grad = g;
    else
        n.grad += g;
}

const Mat& Tape::grad(std::size_t id) const {
    const Node& n = nodes_[id];
    if (n.grad.size() == 0) {
        // Materialise zeros lazily for unreached nodes.
        auto& mut = const_cast<Node&>(n);
        mut.grad = Mat::Zero(n.value.rows(), n.value.cols());
    }
    return n.grad;
}

void Tape::backward(Var root) {
    if (root.tape != this) throw NumericError("backward: root belongs to another tape");
    const Mat& v = nodes_[root.id].value;
    if (v.rows() != 1 || v.cols() != 1)
        throw NumericError("backward: non-scalar root (" + std::to_string(v.rows()) + "x" +
                           std::to_string(v.cols()) + ")");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    accumulate(root.id, Mat::Ones(1, 1));
    for (std::size_t k = root.id + 1; k-- > 0;) {
        Node& n = nodes_[k];
        if (n.back && n.grad.size() != 0) n.back(*this, k);
    }
}

namespace {

void same_shape(const Mat& a, const Mat& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw NumericError(std::string(op) + ": shape mismatch");
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
    if (a.value().cols() != b.value().rows()) throw NumericError("matmul: inner dimensions differ");
    Tape& t = *a.tape;
    return t.push(a.value() * b.value(), {a, b}, [a, b](Tape& t, std::size_t self) {
        const Mat& g = t.upstream(self);
        if (t.requires_grad(a.id)) t.accumulate(a.id, g * b.value().transpose());
        if (t.requires_grad(b.id)) t.accumulate(b.id, a.value().transpose() * g);
    });
}

Var add_bias(Var x, Var bias) {
    if (bias.value().rows() != 1 || bias.value().cols() != x.value().cols())
        throw NumericError("add_bias: bias must be 1 x cols");
    Tape& t = *x.tape;
    Mat out = x.value().rowwise() + bias.value().row(0);
    return t.push(std::move(out), {x, bias}, [x, bias](Tape& t, std::size_t self) {
        const Mat& g = t.upstream(self);
        t.accumulate(x.id, g);
        t.accumulate(bias.id, g.colwise().sum());
    });
}

Var add(Var a, Var b) {
    same_shape(a.value(), b.value(), "add");
    return a.tape->push(a.value() + b.value(), {a, b}, [a, b](Tape& t, std::size_t self) {
        t.accumulate(a.id, t.upstream(self));
        t.accumulate(b.id, t.upstream(self));
    });
}

Var sub(Var a, Var b) {
    same_shape(a.value(), b.value(), "sub");
    return a.tape->push(a.value() - b.value(), {a, b}, [a, b](Tape& t, std::size_t self) {
        t.accumulate(a.id, t.upstream(self));
        t.accumulate(b.id, -t.upstream(self));
    });
}

Var mul(Var a, Var b) {
    same_shape(a.value(), b.value(), "mul");
    return a.tape->push(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& t, std::size_t self) {
        const Mat& g = t.upstream(self);
        if (t.requires_grad(a.id)) t.accumulate(a.id, g.cwiseProduct(b.value()));
        if (t.requires_grad(b.id)) t.accumulate(b.id, g.cwiseProduct(a.value()));
    });
}

Var scale(Var a, double s) {
    return a.tape->push(a.value() * s, {a}, [a, s](Tape& t, std::size_t self) { t.accumulate(a.id, t.upstream(self) * s); });
}

Var tanh(Var a) {
    Mat y = a.value().array().tanh().matrix();
    return a.tape->push(std::move(y), {a}, [a](Tape& t, std::size_t self) {
        const Mat& y = t.value(self);
        t.accumulate(a.id, t.upstream(self).cwiseProduct((1.0 - y.array().square()).matrix()));
    });
}

Var sigmoid(Var a) {
    Mat y = a.value().unaryExpr(&stable_sigmoid);
    return a.tape->push(std::move(y), {a}, [a](Tape& t, std::size_t self) {
        const Mat& y = t.value(self);
        t.accumulate(a.id, t.upstream(self).cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
    });
}

Var softplus(Var a) {
    Mat y = a.value().unaryExpr(&stable_softplus);
    return a.tape->push(std::move(y), {a}, [a](Tape& t, std::size_t self) {
        t.accumulate(a.id, t.upstream(self).cwiseProduct(a.value().unaryExpr(&stable_sigmoid)));
    });
}

Var exp(Var a) {
    Mat y = a.value().array().exp().matrix();
    return a.tape->push(std::move(y), {a}, [a](Tape& t, std::size_t self) {
        t.accumulate(a.id, t.upstream(self).cwiseProduct(t.value(self)));
    });
}

Var square(Var a) {
    return a.tape->push(a.value().array().square().matrix(), {a}, [a](Tape& t, std::size_t self) {
        t.accumulate(a.id, 2.0 * t.upstream(self).cwiseProduct(a.value()));
    });
}

Var clamp(Var a, double lo, double hi) {
    Mat y = a.value().cwiseMax(lo).cwiseMin(hi);
    return a.tape->push(std::move(y), {a}, [a, lo, hi](Tape& t, std::size_t self) {
        const Mat& x = a.value();
        Mat pass = ((x.array() > lo) && (x.array() < hi)).cast<double>().matrix();
        t.accumulate(a.id, t.upstream(self).cwiseProduct(pass));
    });
}

Var minimum(Var a, Var b) {
    same_shape(a.value(), b.value(), "minimum");
    Mat y = a.value().cwiseMin(b.value());
    return a.tape->push(std::move(y), {a, b}, [a, b](Tape& t, std::size_t self) {
        const Mat& g = t.upstream(self);
        Mat pick_a = (a.value().array() <= b.value().array()).cast<double>().matrix();
        if (t.requires_grad(a.id)) t.accumulate(a.id, g.cwiseProduct(pick_a));
        if (t.requires_grad(b.id)) t.accumulate(b.id, g.cwiseProduct((1.0 - pick_a.array()).matrix()));
    });
}

Var sum(Var a) {
    Mat y(1, 1);
    y(0, 0) = a.value().sum();
    return a.tape->push(std::move(y), {a}, [a](Tape& t, std::size_t self) {
        t.accumulate(a.id, Mat::Constant(a.value().rows(), a.value().cols(), t.upstream(self)(0, 0)));
    });
}

Var mean(Var a) {
    const double n = static_cast<double>(a.value().size());
    if (n == 0) throw NumericError("mean: empty matrix");
    Mat y(1, 1);
    y(0, 0) = a.value().sum() / n;
    return a.tape->push(std::move(y), {a}, [a, n](Tape& t, std::size_t self) {
        t.accumulate(a.id, Mat::Constant(a.value().rows(), a.value().cols(), t.upstream(self)(0, 0) / n));
    });
}

Var row_sum(Var a) {
    Mat y = a.value().rowwise().sum();
    return a.tape->push(std::move(y), {a}, [a](Tape& t, std::size_t self) {
        t.accumulate(a.id, t.upstream(self).replicate(1, a.value().cols()));
    });
}

Var bernoulli_logprob(Var logits, const Mat& x) {
    same_shape(logits.value(), x, "bernoulli_logprob");
    const Mat& l = logits.value();
    Mat y = x.cwiseProduct(l) - l.unaryExpr(&stable_softplus);
    return logits.tape->push(std::move(y), {logits}, [logits, x](Tape& t, std::size_t self) {
        t.accumulate(logits.id, t.upstream(self).cwiseProduct(x - logits.value().unaryExpr(&stable_sigmoid)));
    });
}

Var normal_logprob(const Mat& u, Var mu, Var log_std) {
    same_shape(u, mu.value(), "normal_logprob");
    if (log_std.value().rows() != 1 || log_std.value().cols() != u.cols())
        throw NumericError("normal_logprob: log_std must be 1 x cols");
    static const double kHalfLog2Pi = 0.5 * std::log(2.0 * M_PI);
    const Eigen::RowVectorXd ls = log_std.value().row(0);
    const Eigen::RowVectorXd inv_sd = (-ls.array()).exp().matrix();
    Mat z = ((u - mu.value()).array().rowwise() * inv_sd.array()).matrix();
    Mat y = (-0.5 * z.array().square()).rowwise() - (ls.array() + kHalfLog2Pi);
    return mu.tape->push(std::move(y), {mu, log_std}, [mu, log_std, z, inv_sd](Tape& t, std::size_t self) {
        const Mat& g = t.upstream(self);
        if (t.requires_grad(mu.id)) t.accumulate(mu.id, (g.cwiseProduct(z).array().rowwise() * inv_sd.array()).matrix());
        if (t.requires_grad(log_std.id))
            t.accumulate(log_std.id, g.cwiseProduct((z.array().square() - 1.0).matrix()).colwise().sum());
    });
}

Var bernoulli_entropy(Var logits) {
    const Mat& l = logits.value();
    Mat p = l.unaryExpr(&stable_sigmoid);
    Mat y = l.unaryExpr(&stable_softplus) - l.cwiseProduct(p);
    return logits.tape->push(std::move(y), {logits}, [logits, p](Tape& t, std::size_t self) {
        // dH/dl = -l * p (1 - p)
        const Mat& l = logits.value();
        t.accumulate(logits.id,
                     t.upstream(self).cwiseProduct((-l.array() * p.array() * (1.0 - p.array())).matrix()));
    });
}

namespace {

Mat head_weight(const Mat& w0, const Mat& dw, long r, long h, long d) {
    Mat w = w0.block(0, h * d, d, d);
    for (long a = 0; a < d; ++a)
        for (long b = 0; b < d; ++b) w(a, b) += dw(r, h * d * d + a * d + b);
    return w;
}

}  // namespace

Var ttt_apply(Var x, Var w0, const Mat& dw, std::size_t heads) {
    const Mat& X = x.value();
    const Mat& W0 = w0.value();
    if (heads == 0 || X.cols() % static_cast<long>(heads) != 0) throw NumericError("ttt_apply: bad head count");
    const long d = X.cols() / static_cast<long>(heads);
    const long nh = static_cast<long>(heads);
    if (W0.rows() != d || W0.cols() != X.cols()) throw NumericError("ttt_apply: W0 must be d x (heads*d)");
    if (dw.rows() != X.rows() || dw.cols() != nh * d * d)
        throw NumericError("ttt_apply: dW must be rows x (heads*d*d)");

    Mat out(X.rows(), X.cols());
    for (long r = 0; r < X.rows(); ++r)
        for (long h = 0; h < nh; ++h)
            out.block(r, h * d, 1, d) = (head_weight(W0, dw, r, h, d) * X.block(r, h * d, 1, d).transpose()).transpose();

    return x.tape->push(std::move(out), {x, w0}, [x, w0, dw, nh, d](Tape& t, std::size_t self) {
        const Mat& g = t.upstream(self);
        const Mat& X = x.value();
        const Mat& W0 = w0.value();
        Mat gx = Mat::Zero(X.rows(), X.cols());
        Mat gw = Mat::Zero(d, X.cols());
        for (long r = 0; r < X.rows(); ++r)
            for (long h = 0; h < nh; ++h) {
                const Vec gr = g.block(r, h * d, 1, d).transpose();
                const Vec xr = X.block(r, h * d, 1, d).transpose();
                gx.block(r, h * d, 1, d) = (head_weight(W0, dw, r, h, d).transpose() * gr).transpose();
                gw.block(0, h * d, d, d) += gr * xr.transpose();
            }
        if (t.requires_grad(x.id)) t.accumulate(x.id, gx);
        if (t.requires_grad(w0.id)) t.accumulate(w0.id, gw);
    });
}

}  // namespace edgeserve::learn
