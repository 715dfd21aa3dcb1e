#pragma once

#include <cstdint>
#include <vector>

#include "learn/tape.hpp"

namespace edgeserve::learn {

/// Self-supervised reconstruction loss of a linear TTT map:
/// l(W; O) = || W (mask . O) - O ||^2.
double ttt_loss(const Mat& w, const Vec& mask, const Vec& obs);

/// Closed-form gradient 2 (W O~ - O) O~^T.
Mat ttt_gradient(const Mat& w, const Vec& mask, const Vec& obs);

/// One inner step W' = W - eta * grad l(W; O). The result is a recurrent
/// state: outer gradients do not flow through it.
Mat ttt_inner_update(const Mat& w, const Vec& mask, const Vec& obs, double eta);

/// Draws a 0/1 corruption mask with the given keep probability; at least one
/// entry is always kept.
Vec corruption_mask(std::size_t dim, double keep_prob, std::uint64_t seed);

/// Multi-head linear TTT layer. Each head owns a contiguous d-dimensional
/// slice of the input and its own d x d hidden weight. Inner updates use
/// mini-batch TTT: within a block of `minibatch` steps every gradient is taken
/// at the block-start weight and applied cumulatively, so W after step s of a
/// block is W_start - eta * sum_{s' <= s} grad l(W_start; O_s').
class TttLayer {
public:
    TttLayer() = default;
    TttLayer(Mat w0, std::vector<Vec> masks, double eta, std::size_t minibatch);

    std::size_t heads() const { return masks_.size(); }
    std::size_t head_dim() const { return static_cast<std::size_t>(w0_.rows()); }
    std::size_t dim() const { return heads() * head_dim(); }
    double eta() const { return eta_; }
    const Mat& w0() const { return w0_; }
    const std::vector<Vec>& masks() const { return masks_; }

    /// Restarts the recurrent state at W0 (episode start).
    void reset();
    /// Replaces W0 (after an outer update) and resets.
    void set_w0(const Mat& w0);
    void set_eta(double eta) { eta_ = eta; }

    /// Update-then-output: inner step on x, then z = W x per head.
    Vec advance(const Vec& x);
    /// Current W - W0 flattened as heads x (d x d), row-major per head.
    Vec delta() const;
    /// Current weight of head h.
    const Mat& weight(std::size_t h) const { return w_[h]; }

private:
    Mat w0_;
    std::vector<Vec> masks_;
    double eta_ = 0.0;
    std::size_t minibatch_ = 1;

    std::vector<Mat> w_;
    std::vector<Mat> block_start_;
    std::vector<Mat> grad_sum_;
    std::size_t in_block_ = 0;
};

/// Runs a whole sequence from W0 and returns the features of every step.
std::vector<Vec> ttt_forward(TttLayer layer, const std::vector<Vec>& sequence);

}  // namespace edgeserve::learn
