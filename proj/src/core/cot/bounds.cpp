#include "cot/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "common/error.hpp"

namespace edgeserve::cot {

double ambiguity(const AmbiguityModel& model, double length) {
    if (!(length >= 1.0)) throw DomainError("ambiguity: length must be >= 1");
    return std::min(model.sigma, model.sigma * std::exp(-model.decay_rate * (length - 1.0)));
}

std::uint64_t length_threshold(const AmbiguityModel& model, double target) {
    if (!(target >= 0.0)) throw DomainError("length_threshold: unreachable target below zero");
    if (ambiguity(model, 1.0) <= target) return 1;
    if (model.sigma <= 0.0) return 1;
    if (target == 0.0 || model.decay_rate <= 0.0)
        throw DomainError("length_threshold: target is never reached by the decay");
    // eps is non-increasing, so the predicate eps(k) <= target is monotone.
    std::uint64_t lo = 1, hi = 2;
    while (ambiguity(model, static_cast<double>(hi)) > target) {
        lo = hi;
        hi *= 2;
        if (hi > (1ULL << 62)) throw DomainError("length_threshold: target is never reached by the decay");
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ambiguity(model, static_cast<double>(mid)) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace {

double odds(double eps) {
    if (!(eps < 1.0)) throw DomainError("ambiguity too high: eps must be < 1");
    if (eps < 0.0) throw DomainError("ambiguity must be >= 0");
    return eps / (1.0 - eps);
}

}  // namespace

double cot_bound(double input_ambiguity, std::span<const double> steps) {
    double bound = 2.0 * odds(input_ambiguity);
    for (double e : steps) bound *= odds(e);
    return bound;
}

ScCotBound sc_cot_bound(const BoundInputs& in) {
    if (in.step_ambiguity.empty()) throw DomainError("sc_cot_bound: at least one path is required");
    const double eta = 2.0 * in.consensus * std::pow(in.skewness, static_cast<double>(in.step_ambiguity.size())) *
                       odds(in.input_ambiguity);
    ScCotBound out;
    for (const auto& path : in.step_ambiguity) {
        double b = eta;
        for (double e : path) b *= odds(e);
        out.per_path.push_back(b);
    }
    out.max_over_paths = *std::max_element(out.per_path.begin(), out.per_path.end());
    if (!in.path_ambiguity.empty()) {
        double b = eta;
        for (double e : in.path_ambiguity) b *= odds(e);
        out.over_paths = b;
    }
    return out;
}

std::string consensus(std::span<const std::string> candidates) {
    if (candidates.empty()) throw DomainError("consensus: empty candidate list");
    std::map<std::string, std::size_t> counts;
    for (const auto& c : candidates) ++counts[c];
    // std::map iterates in ascending key order, so the first maximum wins ties.
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

}  // namespace edgeserve::cot
