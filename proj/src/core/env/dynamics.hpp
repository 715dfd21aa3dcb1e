#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "common/grid.hpp"
#include "env/demand.hpp"
#include "env/spec.hpp"

namespace edgeserve::env {

/// Per-cell cache bit, accumulated tokens K and age of thoughts.
struct EnvState {
    Grid<int> cache;
    Grid<double> tokens;
    Grid<double> aot;
    std::uint64_t slot = 0;

    static EnvState initial(Shape shape);
    bool operator==(const EnvState&) const = default;
};

/// Cache decision a in {0,1} and offload fraction b in [0,1] per cell.
/// b is the share of the cell's requests sent to the cloud.
struct Action {
    Grid<int> cache;
    Grid<double> offload;
    bool repaired = false;

    static Action all_offload(Shape shape);
    bool operator==(const Action&) const = default;
};

struct ServerFeasibility {
    double memory_used = 0.0;
    double energy_used = 0.0;
    bool memory_ok = true;
    bool edge_share_ok = true;  // (1 - b) * 1{R > 0} <= a on every cell
    bool energy_ok = true;
    bool ok() const { return memory_ok && edge_share_ok && energy_ok; }
};

struct FeasibilityReport {
    std::vector<ServerFeasibility> servers;
    bool feasible() const;
    std::size_t violations() const;
};

/// Relative slack allowed on the energy cap, absorbing rounding in the
/// exact-fraction energy repair.
inline constexpr double kCapTolerance = 1e-9;

FeasibilityReport check_feasibility(const ValidatedSystem& sys, const Action& action, const RequestMatrix& requests);

/// Makes an arbitrary proposal feasible: memory eviction by ascending demand,
/// forced offload of uncached demand, then partial offload of the heaviest
/// edge load until the energy cap holds. A feasible input is returned as is.
Action repair_action(const ValidatedSystem& sys, const Action& raw, const RequestMatrix& requests);

/// Tokens executed at the edge summed over all J reasoning paths of one cell.
double tokens_executed(int cache, double offload, int requests, int paths, double thought_len);
/// Tokens of one reasoning path.
double tokens_per_path(int cache, double offload, int requests, double thought_len);

struct StepOutcome {
    Action effective;           // post-eviction action used for costing
    Grid<double> tokens;        // delta per cell (all paths), zero on evicted cells
    std::vector<std::size_t> evicted;  // flat cell indices evicted for window overflow
    double total_tokens = 0.0;
};

/// Advances token counters and ages of thought by one slot and force-evicts
/// cells whose context window overflows.
std::pair<EnvState, StepOutcome> step(const ValidatedSystem& sys, const EnvState& state, const Action& action,
                                      const RequestMatrix& requests);

}  // namespace edgeserve::env
