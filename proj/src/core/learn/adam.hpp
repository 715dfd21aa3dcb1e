#pragma once

#include <vector>

#include "learn/tape.hpp"

namespace edgeserve::learn {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double grad_norm_cap = 0.5;  // <= 0 disables clipping
};

/// Adam with global gradient-norm clipping.
class Adam {
public:
    Adam() = default;
    Adam(const AdamConfig& cfg, const std::vector<Mat>& params);

    /// Clips `grads` in place to the norm cap, then updates `params`.
    /// Returns the pre-clip global norm.
    double step(std::vector<Mat>& params, std::vector<Mat>& grads);

    long steps() const { return t_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    AdamConfig cfg_;
    std::vector<Mat> m_, v_;
    long t_ = 0;
};

double global_norm(const std::vector<Mat>& grads);

}  // namespace edgeserve::learn
