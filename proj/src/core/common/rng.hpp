#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace edgeserve {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a list of labels
/// (episode index, slot, purpose tag, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> labels) {
    std::uint64_t h = splitmix64(base);
    for (auto l : labels) h = splitmix64(h ^ (l + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> labels) {
    return Rng(derive_seed(base, labels));
}

}  // namespace edgeserve
