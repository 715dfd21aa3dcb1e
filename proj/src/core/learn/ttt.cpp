#include "learn/ttt.hpp"

#include <random>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace edgeserve::learn {

double ttt_loss(const Mat& w, const Vec& mask, const Vec& obs) {
    const Vec corrupted = mask.cwiseProduct(obs);
    return (w * corrupted - obs).squaredNorm();
}

Mat ttt_gradient(const Mat& w, const Vec& mask, const Vec& obs) {
    const Vec corrupted = mask.cwiseProduct(obs);
    return 2.0 * (w * corrupted - obs) * corrupted.transpose();
}

Mat ttt_inner_update(const Mat& w, const Vec& mask, const Vec& obs, double eta) {
    return w - eta * ttt_gradient(w, mask, obs);
}

Vec corruption_mask(std::size_t dim, double keep_prob, std::uint64_t seed) {
    Rng rng(seed);
    std::bernoulli_distribution keep(keep_prob);
    Vec m(static_cast<long>(dim));
    for (long k = 0; k < m.size(); ++k) m(k) = keep(rng) ? 1.0 : 0.0;
    if (dim > 0 && m.sum() == 0.0) m(static_cast<long>(rng() % dim)) = 1.0;
    return m;
}

TttLayer::TttLayer(Mat w0, std::vector<Vec> masks, double eta, std::size_t minibatch)
    : w0_(std::move(w0)), masks_(std::move(masks)), eta_(eta), minibatch_(minibatch) {
    if (masks_.empty()) throw NumericError("ttt layer needs at least one head");
    if (minibatch_ == 0) throw NumericError("ttt minibatch must be >= 1");
    const long d = w0_.rows();
    if (w0_.cols() != d * static_cast<long>(masks_.size())) throw NumericError("ttt W0 must be d x (heads*d)");
    for (const auto& m : masks_)
        if (m.size() != d) throw NumericError("ttt mask has the wrong size");
    reset();
}

void TttLayer::reset() {
    const long d = w0_.rows();
    w_.clear();
    for (std::size_t h = 0; h < heads(); ++h) w_.push_back(w0_.block(0, static_cast<long>(h) * d, d, d));
    block_start_ = w_;
    grad_sum_.assign(heads(), Mat::Zero(d, d));
    in_block_ = 0;
}

void TttLayer::set_w0(const Mat& w0) {
    w0_ = w0;
    reset();
}

Vec TttLayer::advance(const Vec& x) {
    const long d = w0_.rows();
    if (x.size() != static_cast<long>(dim())) throw NumericError("ttt input has the wrong size");
    Vec z(x.size());
    for (std::size_t h = 0; h < heads(); ++h) {
        const Vec obs = x.segment(static_cast<long>(h) * d, d);
        grad_sum_[h] += ttt_gradient(block_start_[h], masks_[h], obs);
        w_[h] = block_start_[h] - eta_ * grad_sum_[h];
        z.segment(static_cast<long>(h) * d, d) = w_[h] * obs;
    }
    if (++in_block_ == minibatch_) {
        block_start_ = w_;
        for (auto& g : grad_sum_) g.setZero();
        in_block_ = 0;
    }
    return z;
}

Vec TttLayer::delta() const {
    const long d = w0_.rows();
    Vec out(static_cast<long>(heads()) * d * d);
    for (std::size_t h = 0; h < heads(); ++h) {
        const Mat diff = w_[h] - w0_.block(0, static_cast<long>(h) * d, d, d);
        for (long a = 0; a < d; ++a)
            for (long b = 0; b < d; ++b) out(static_cast<long>(h) * d * d + a * d + b) = diff(a, b);
    }
    return out;
}

std::vector<Vec> ttt_forward(TttLayer layer, const std::vector<Vec>& sequence) {
    layer.reset();
    std::vector<Vec> out;
    out.reserve(sequence.size());
    for (const auto& x : sequence) out.push_back(layer.advance(x));
    return out;
}

}  // namespace edgeserve::learn
