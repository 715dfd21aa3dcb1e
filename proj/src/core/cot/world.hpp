#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cot/bounds.hpp"

namespace edgeserve::cot {

/// A finite latent-context world: contexts with a prior, and per-context
/// emission tables for the task prompt d0, for each reasoning step and for
/// the final answer D. Small enough to enumerate exactly.
struct CategoricalWorld {
    std::string name;
    std::size_t true_context = 0;
    std::vector<double> prior;
    std::vector<std::vector<double>> input_table;   // [context][symbol]
    std::vector<std::vector<double>> step_table;    // [context][symbol]
    std::vector<std::vector<double>> answer_table;  // [context][answer]
    double consensus = 1.0;

    std::size_t contexts() const { return prior.size(); }
};

/// Observed prompt plus J reasoning paths of step symbols.
struct WorldQuery {
    std::size_t input = 0;
    std::vector<std::vector<std::size_t>> paths;
};

inline constexpr std::size_t kMaxContexts = 6;
inline constexpr std::size_t kMaxSteps = 4;

/// Throws DomainError when a table row or the prior does not sum to one
/// within 1e-12, or indices are out of range.
void validate_world(const CategoricalWorld& w, const WorldQuery& q);

/// 1 - posterior of the true context after observing one symbol.
double symbol_ambiguity(const CategoricalWorld& w, const std::vector<std::vector<double>>& table, std::size_t symbol);
/// 1 - posterior of the true context after observing a whole path.
double path_ambiguity(const CategoricalWorld& w, const std::vector<std::size_t>& path);

/// Uniform prior, every observed ambiguity <= 1/2, and path ambiguity
/// non-increasing along each path prefix.
bool satisfies_assumptions(const CategoricalWorld& w, const WorldQuery& q);

/// Ambiguities of the query, ready for sc_cot_bound.
BoundInputs bound_inputs(const CategoricalWorld& w, const WorldQuery& q);

/// max over answers D of |p(D | d0, E_1..E_J) - q(D | c*)|, by exact
/// enumeration of the contexts. Throws DomainError("too large") above the caps.
double empirical_gap(const CategoricalWorld& w, const WorldQuery& q);

struct WorldFixture {
    CategoricalWorld world;
    WorldQuery query;
    bool expect_assumptions = true;
    double pinned_gap = -1.0;  // < 0: not pinned
};

std::vector<WorldFixture> load_world_fixtures(const std::string& path);

}  // namespace edgeserve::cot
