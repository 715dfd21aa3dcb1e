#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace edgeserve::cot {

/// Exponentially decaying ambiguity, anchored at length 1:
/// eps(len) = min(sigma, sigma * exp(-rate * (len - 1))).
struct AmbiguityModel {
    double sigma = 0.5;
    double decay_rate = 0.1;
};

double ambiguity(const AmbiguityModel& model, double length);

/// Smallest integer k* such that eps(k) <= target for every k >= k*.
std::uint64_t length_threshold(const AmbiguityModel& model, double target);

struct BoundInputs {
    double input_ambiguity = 0.0;  // eps(d0)
    double consensus = 1.0;        // zeta
    double skewness = 1.0;         // fixed by the uniform context prior
    /// Step ambiguities of every reasoning path (outer: path, inner: step).
    std::vector<std::vector<double>> step_ambiguity;
    /// Ambiguity of each whole path, when known. Enables the product-over-paths form.
    std::vector<double> path_ambiguity;
};

/// eta * prod_y eps_y / (1 - eps_y) with eta = 2 eps0 / (1 - eps0).
double cot_bound(double input_ambiguity, std::span<const double> steps);

struct ScCotBound {
    std::vector<double> per_path;  // eta * prod over the steps of path j
    double max_over_paths = 0.0;
    /// eta * prod over paths of eps(E_j) / (1 - eps(E_j)); empty without path ambiguities.
    std::optional<double> over_paths;
};

ScCotBound sc_cot_bound(const BoundInputs& in);

/// Most frequent answer; ties go to the lexicographically smallest encoding.
std::string consensus(std::span<const std::string> candidates);

}  // namespace edgeserve::cot
