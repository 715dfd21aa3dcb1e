#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "env/dynamics.hpp"

namespace edgeserve::policy {

/// What a decision rule sees at the start of a slot.
struct Observation {
    Grid<int> cache;       // previous-slot cache bits
    Grid<int> requests;    // current-slot requests
    Grid<double> aot;      // previous-slot ages of thought
};

Observation observe(const env::EnvState& state, const env::RequestMatrix& requests);

enum class PolicyKind { Fifo, Lfu, LeastAot, CloudOnly };

std::optional<PolicyKind> parse_policy(std::string_view name);
std::string_view policy_name(PolicyKind kind);

/// Per-instance state of the cache baselines.
struct Bookkeeping {
    Grid<std::uint64_t> inserted_at;  // load order stamp of cached cells
    Grid<double> hits;                // lifetime requests served at the edge
    std::uint64_t clock = 0;

    static Bookkeeping empty(Shape shape);
};

/// Request-greedy fill with policy-keyed eviction. Cells are visited in
/// descending demand; a missing cell is loaded when it fits, evicting cached
/// cells that are not already claimed by higher demand, lowest key first
/// (FIFO: oldest load, LFU: fewest lifetime hits, LAoT: smallest AoT). Cached
/// cells serve fully at the edge (b = 0), everything else goes to the cloud.
env::Action decide(PolicyKind kind, const Observation& obs, const env::ValidatedSystem& sys, const Bookkeeping& book);

/// FIFO stamps on 0 -> 1 loads; LFU counters add the requests of served cells.
Bookkeeping bookkeeping_update(PolicyKind kind, const Bookkeeping& book, const Observation& obs,
                               const env::Action& effective);

}  // namespace edgeserve::policy
