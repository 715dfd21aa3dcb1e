#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edgeserve::learn {

struct GradcheckResult {
    std::string op;
    std::size_t points = 0;
    double max_rel_error = 0.0;
    bool passed = false;
};

inline constexpr double kGradcheckTolerance = 1e-4;

/// Compares the tape's gradients with central finite differences for every
/// differentiable op and for the full PPO loss of a small network. Each op is
/// probed at `points` random inputs; the scalar root is a random weighted sum
/// of the op output, so every Jacobian entry is exercised. Relative error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-4).
std::vector<GradcheckResult> gradcheck_all(std::uint64_t seed, std::size_t points = 20);

}  // namespace edgeserve::learn
