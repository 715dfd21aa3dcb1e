#include "learn/adam.hpp"

#include <cmath>

#include "common/error.hpp"

namespace edgeserve::learn {

double global_norm(const std::vector<Mat>& grads) {
    double s = 0.0;
    for (const auto& g : grads) s += g.squaredNorm();
    return std::sqrt(s);
}

Adam::Adam(const AdamConfig& cfg, const std::vector<Mat>& params) : cfg_(cfg) {
    for (const auto& p : params) {
        m_.push_back(Mat::Zero(p.rows(), p.cols()));
        v_.push_back(Mat::Zero(p.rows(), p.cols()));
    }
}

double Adam::step(std::vector<Mat>& params, std::vector<Mat>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) throw NumericError("adam: parameter count changed");
    const double norm = global_norm(grads);
    if (!std::isfinite(norm)) throw NumericError("adam: non-finite gradient norm");
    if (cfg_.grad_norm_cap > 0.0 && norm > cfg_.grad_norm_cap)
        for (auto& g : grads) g *= cfg_.grad_norm_cap / norm;

    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grads[k];
        v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grads[k].cwiseAbs2();
        params[k].array() -= cfg_.lr * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + cfg_.eps);
    }
    return norm;
}

}  // namespace edgeserve::learn
