#pragma once

#include <cstdint>
#include <string>

#include "learn/network.hpp"

namespace edgeserve::learn {

inline constexpr char kCheckpointMagic[4] = {'E', 'S', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout: magic, version, config hash, network shape, then every
/// parameter tensor and TTT mask as (name, rows, cols, row-major doubles).
void save_checkpoint(const ActorCritic& net, std::uint64_t config_hash, const std::string& path);

struct LoadedCheckpoint {
    ActorCritic net;
    std::uint64_t config_hash = 0;
};

/// Throws Error(Io) on unreadable files and Error(Parse) on a bad magic,
/// version or truncated body.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace edgeserve::learn
